#pragma once

#include <stdexcept>
#include <string>

namespace dml {

// Base class for every failure the engine reports.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operand shapes disagree (vector lengths, matrix dims, gradient layouts).
struct ShapeError : Error {
  using Error::Error;
};

// Non-finite values where finite ones are required.
struct NumericError : Error {
  using Error::Error;
};

// Invalid configuration (bad dims, negative margins, empty grids, ...).
struct ConfigError : Error {
  using Error::Error;
};

// Out-of-range inputs and violated call preconditions
// (singleton classes, empty datasets, undefined metrics, ...).
struct ValueError : Error {
  using Error::Error;
};

// Malformed file contents; message carries the offending line or key.
struct ParseError : Error {
  using Error::Error;
};

// Filesystem failures (missing input, unwritable output).
struct IoError : Error {
  using Error::Error;
};

// Training produced a non-finite loss or update.
struct DivergenceError : Error {
  using Error::Error;
};

}  // namespace dml
