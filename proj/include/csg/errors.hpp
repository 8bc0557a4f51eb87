#pragma once

#include <stdexcept>
#include <string>

namespace csg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: dimension mismatches, empty inputs.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Operation called on an object that is not ready for it (e.g. empty history).
class InvalidState : public Error {
 public:
  using Error::Error;
};

/// Parameter combinations that violate a documented constraint.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Valid configuration that this implementation does not support
/// (exact cell measures outside one parameter dimension, missing CDF).
class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or failed numerical procedures.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace csg
