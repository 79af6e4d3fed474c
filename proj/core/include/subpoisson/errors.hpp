#pragma once

#include <stdexcept>
#include <string>

namespace subpoisson {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside its mathematical domain (negative mean, eta > 1, ...).
struct ParameterDomainError : Error {
  using Error::Error;
};

/// A requested truncation bound cannot hold the required probability mass.
struct TruncationError : Error {
  TruncationError(const std::string& what, int suggested)
      : Error(what), suggested_bound(suggested) {}
  int suggested_bound = -1;
};

/// Array shapes do not line up.
struct DimensionError : Error {
  using Error::Error;
};

/// Conditioning on an event of (numerically) zero probability.
struct ConditioningError : Error {
  using Error::Error;
};

/// A quantity such as a moment ratio is undefined for this input (zero mean, ...).
struct UndefinedValueError : Error {
  using Error::Error;
};

/// A criterion cannot be evaluated on this input (vanishing reference elements, ...).
struct InapplicableCriterionError : Error {
  using Error::Error;
};

/// The forward model assigns zero probability to observed data.
struct ModelMismatchError : Error {
  using Error::Error;
};

/// A fit stagnated across all restarts.
struct FitFailureError : Error {
  using Error::Error;
};

}  // namespace subpoisson
