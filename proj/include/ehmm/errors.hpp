#pragma once

#include <stdexcept>

namespace ehmm {

// Error taxonomy shared by the library and the CLI. The CLI maps these to
// exit codes: UsageError -> 1, NumericError/DomainError -> 2, IoError -> 3.

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An all minus-infinity column in the embedded HMM. The current sequence
// always forms a finite-weight path through the pools, so hitting this means
// a pool distribution failed to support its own draws; callers treat it as a
// defect, not a recoverable condition.
struct InfeasibleUpdate : NumericError {
  using NumericError::NumericError;
};

}  // namespace ehmm
