#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "medmod/errors.hpp"

namespace medmod {

// ---------------------------------------------------------------------------
// Term / ModelFormula — right-hand-side description of a regression equation
// ---------------------------------------------------------------------------

enum class TermKind { Intercept, Main, Product };

struct Term {
  TermKind kind = TermKind::Intercept;
  std::string a;  // main variable, or first product factor
  std::string b;  // second product factor

  static Term intercept() { return {TermKind::Intercept, "", ""}; }
  static Term main(std::string name) { return {TermKind::Main, std::move(name), ""}; }
  static Term product(std::string first, std::string second) {
    return {TermKind::Product, std::move(first), std::move(second)};
  }

  std::string label() const {
    switch (kind) {
      case TermKind::Intercept: return "intercept";
      case TermKind::Main: return a;
      case TermKind::Product: return a + ":" + b;
    }
    return "";
  }

  friend bool operator==(const Term& lhs, const Term& rhs) {
    return lhs.kind == rhs.kind && lhs.a == rhs.a && lhs.b == rhs.b;
  }
};

/// Response plus ordered terms; the intercept is implicit and on by default.
struct ModelFormula {
  std::string response;
  std::vector<Term> terms;
  bool intercept = true;
};

// ---------------------------------------------------------------------------
// DataTable — named numeric columns of equal length
// ---------------------------------------------------------------------------

class DataTable {
 public:
  DataTable() = default;

  explicit DataTable(std::vector<std::pair<std::string, Eigen::VectorXd>> columns) {
    names_.reserve(columns.size());
    values_.reserve(columns.size());
    for (auto& [name, values] : columns) {
      if (has(name)) throw InvalidDataError("duplicate column name: " + name);
      if (!values_.empty() && values.size() != values_.front().size()) {
        throw InvalidDataError("column '" + name + "' has mismatched length");
      }
      if (values.size() < 1) throw InvalidDataError("column '" + name + "' is empty");
      if (!values.allFinite()) {
        throw InvalidDataError("column '" + name + "' contains non-finite values");
      }
      names_.push_back(std::move(name));
      values_.push_back(std::move(values));
    }
  }

  Eigen::Index rows() const { return values_.empty() ? 0 : values_.front().size(); }
  std::size_t column_count() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  bool has(const std::string& name) const {
    for (const auto& n : names_) {
      if (n == name) return true;
    }
    return false;
  }

  const Eigen::VectorXd& col(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == name) return values_[i];
    }
    throw UnknownColumnError(name);
  }

 private:
  std::vector<std::string> names_;
  std::vector<Eigen::VectorXd> values_;
};

/// Copy of `data` with the selected columns shifted to sample mean zero.
/// Product terms are not touched here; designs rebuild them from the
/// (possibly centered) main columns.
inline DataTable mean_center(const DataTable& data, const std::vector<std::string>& names) {
  for (const auto& name : names) {
    if (!data.has(name)) throw UnknownColumnError(name);
  }
  std::vector<std::pair<std::string, Eigen::VectorXd>> columns;
  columns.reserve(data.column_count());
  for (const auto& name : data.names()) {
    Eigen::VectorXd values = data.col(name);
    for (const auto& selected : names) {
      if (selected == name) {
        values.array() -= values.mean();
        break;
      }
    }
    columns.emplace_back(name, std::move(values));
  }
  return DataTable(std::move(columns));
}

// ---------------------------------------------------------------------------
// Design matrix construction
// ---------------------------------------------------------------------------

struct Design {
  Eigen::MatrixXd matrix;        // n x k
  std::vector<Term> columns;     // column labels, intercept first when present
};

/// Expand a formula against a table: intercept column, then main terms in
/// formula order, then product terms in formula order. Products are computed
/// elementwise from the table's current main columns.
inline Design build_design(const DataTable& data, const ModelFormula& formula) {
  for (std::size_t i = 0; i < formula.terms.size(); ++i) {
    for (std::size_t j = i + 1; j < formula.terms.size(); ++j) {
      if (formula.terms[i] == formula.terms[j]) {
        throw InvalidDataError("duplicate term in formula: " + formula.terms[i].label());
      }
    }
  }

  std::vector<Term> ordered;
  ordered.reserve(formula.terms.size() + 1);
  if (!formula.intercept && formula.terms.empty()) {
    throw InvalidDataError("formula has no design columns");
  }
  if (formula.intercept) ordered.push_back(Term::intercept());
  for (const auto& term : formula.terms) {
    if (term.kind == TermKind::Main) ordered.push_back(term);
  }
  for (const auto& term : formula.terms) {
    if (term.kind == TermKind::Product) ordered.push_back(term);
  }

  const Eigen::Index n = data.rows();
  Design design;
  design.matrix.resize(n, static_cast<Eigen::Index>(ordered.size()));
  design.columns = std::move(ordered);
  for (std::size_t j = 0; j < design.columns.size(); ++j) {
    const Term& term = design.columns[j];
    switch (term.kind) {
      case TermKind::Intercept:
        design.matrix.col(static_cast<Eigen::Index>(j)).setOnes();
        break;
      case TermKind::Main:
        design.matrix.col(static_cast<Eigen::Index>(j)) = data.col(term.a);
        break;
      case TermKind::Product:
        design.matrix.col(static_cast<Eigen::Index>(j)) =
            data.col(term.a).cwiseProduct(data.col(term.b));
        break;
    }
  }
  return design;
}

}  // namespace medmod
