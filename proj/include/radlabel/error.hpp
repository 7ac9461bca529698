#pragma once

#include <stdexcept>
#include <string>

namespace radlabel {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad parameters, configuration, or violated preconditions (CLI exit code 2).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed, inconsistent or insufficient input data (CLI exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

/// An internal invariant was broken, e.g. a negative sampler count.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace radlabel
