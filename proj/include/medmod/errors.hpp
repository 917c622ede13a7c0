#pragma once

#include <stdexcept>
#include <string>

namespace medmod {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownColumnError : Error {
  explicit UnknownColumnError(const std::string& name)
      : Error("unknown column: " + name) {}
};

/// Design matrix is not full column rank at the configured tolerance.
struct RankDeficientError : Error {
  using Error::Error;
};

/// Fewer observations than design columns.
struct TooFewRowsError : Error {
  using Error::Error;
};

struct InvalidDfError : Error {
  using Error::Error;
};

/// A coefficient lookup referenced a term the fit does not contain.
struct MissingTermError : Error {
  using Error::Error;
};

struct NonPsdCorrelationError : Error {
  using Error::Error;
};

struct NotPositiveDefiniteError : Error {
  using Error::Error;
};

struct DimensionMismatchError : Error {
  using Error::Error;
};

/// Implied covariance became singular where it must be invertible.
struct SingularImpliedError : Error {
  using Error::Error;
};

/// Fit index requested for a model with zero degrees of freedom.
struct ZeroDfError : Error {
  using Error::Error;
};

/// Malformed input data (non-finite values, duplicate or ragged columns, ...).
struct InvalidDataError : Error {
  using Error::Error;
};

}  // namespace medmod
