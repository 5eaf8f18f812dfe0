#pragma once

#include <stdexcept>
#include <string>

namespace spectrack {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes of operands do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A configuration value is invalid or inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A NaN or Inf appeared where a finite value is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed binary or JSON input.
class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace spectrack
