#pragma once

#include <Eigen/Core>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "medmod/errors.hpp"
#include "medmod/table.hpp"

// Strict CSV handling: comma-separated, one header row, '.' decimals,
// every cell numeric. Missing or malformed cells are rejected outright.

namespace medmod {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (const char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  return fields;
}

inline double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
  std::size_t begin = 0;
  std::size_t end = cell.size();
  while (begin < end && (cell[begin] == ' ' || cell[begin] == '\t')) ++begin;
  while (end > begin && (cell[end - 1] == ' ' || cell[end - 1] == '\t')) --end;
  double value = 0;
  const auto result = std::from_chars(cell.data() + begin, cell.data() + end, value);
  if (result.ec != std::errc() || result.ptr != cell.data() + end || begin == end) {
    throw InvalidDataError("non-numeric or missing cell at row " + std::to_string(row) +
                           ", column '" + column + "'");
  }
  return value;
}

inline DataTable read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidDataError("empty CSV input");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.empty()) throw InvalidDataError("CSV header row is empty");

  std::vector<std::vector<double>> columns(header.size());
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    ++row;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw InvalidDataError("row " + std::to_string(row) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      columns[j].push_back(parse_cell(fields[j], row, header[j]));
    }
  }
  if (row == 0) throw InvalidDataError("CSV has a header but no data rows");

  std::vector<std::pair<std::string, Eigen::VectorXd>> named;
  named.reserve(header.size());
  for (std::size_t j = 0; j < header.size(); ++j) {
    named.emplace_back(header[j],
                       Eigen::Map<Eigen::VectorXd>(columns[j].data(),
                                                   static_cast<Eigen::Index>(columns[j].size())));
  }
  return DataTable(std::move(named));
}

inline DataTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  try {
    return read_csv(in);
  } catch (const InvalidDataError& e) {
    throw InvalidDataError(path + ": " + e.what());
  }
}

/// Square covariance matrix from a CSV whose header names the variables.
struct NamedMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd values;
};

inline NamedMatrix read_covariance_csv(const std::string& path) {
  const DataTable table = read_csv_file(path);
  NamedMatrix out;
  out.names = table.names();
  const auto p = static_cast<Eigen::Index>(out.names.size());
  if (table.rows() != p) {
    throw InvalidDataError(path + ": covariance matrix must be square (header names " +
                           std::to_string(p) + " variables, " + std::to_string(table.rows()) +
                           " rows found)");
  }
  out.values.resize(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    out.values.col(j) = table.col(out.names[static_cast<std::size_t>(j)]);
  }
  return out;
}

/// Fixed-point with the given number of decimals; deterministic across runs.
inline std::string format_fixed(double value, int decimals) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, value);
  return buffer;
}

}  // namespace medmod
