#pragma once

#include <stdexcept>
#include <string>

namespace syncdraw {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dimension or geometry mismatch between operands.
struct ShapeError : Error {
  using Error::Error;
};

/// A value outside the parameter domain (non-finite, non-positive, ...).
struct ParamError : Error {
  using Error::Error;
};

/// Caption text that does not match the grammar. `position` is the
/// 1-based index of the offending token.
struct ParseError : Error {
  int position;
  ParseError(const std::string& msg, int pos) : Error(msg), position(pos) {}
};

/// File format or filesystem failure.
struct IoError : Error {
  using Error::Error;
};

/// Inconsistent run configuration (flags, model/caption mismatch, ...).
struct ConfigError : Error {
  using Error::Error;
};

/// Failure inside the optimization loop (NaN gradients, ...).
struct TrainError : Error {
  using Error::Error;
};

}  // namespace syncdraw
