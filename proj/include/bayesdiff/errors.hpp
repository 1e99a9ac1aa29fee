#pragma once

#include <stdexcept>
#include <string>

namespace bayesdiff {

// Base for everything thrown by this library. Anything derived from
// InvalidInput is a user/validation problem (CLI exit code 2); the rest are
// internal faults (exit code 1).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidInput : Error {
  using Error::Error;
};

struct DimensionError : InvalidInput {
  using InvalidInput::InvalidInput;
};

struct NoDataError : InvalidInput {
  using InvalidInput::InvalidInput;
};

struct UnimputablePeptideError : InvalidInput {
  using InvalidInput::InvalidInput;
};

// Raised when nu_N - P + 1 <= 0; carries a remediation hint.
struct InsufficientDofError : InvalidInput {
  using InvalidInput::InvalidInput;
};

struct ParseError : InvalidInput {
  using InvalidInput::InvalidInput;
};

// Scale matrix could not be factorized even after symmetrization and jitter.
struct FactorizationError : Error {
  using Error::Error;
};

}  // namespace bayesdiff
