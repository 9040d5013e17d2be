#pragma once

#include <stdexcept>
#include <string>

namespace odml {

/// Invalid run configuration (bad field values, unknown keys, missing files).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or unusable input data (CSV parse failures, short series, ...).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A computation could not be completed (non-finite state, no converged fit).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The HAC variance collapsed to zero, so the test statistic is undefined.
struct DegenerateVarianceError : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace odml
