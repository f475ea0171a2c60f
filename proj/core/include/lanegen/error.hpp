#pragma once

#include <stdexcept>
#include <string>

namespace lanegen {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments or violated operation preconditions (shape mismatch,
// unknown class id, ...). Maps to CLI exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed on-disk data (palette CSV, checkpoint, dataset layout).
// Maps to CLI exit code 2.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Inconsistent or out-of-range configuration. Maps to CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filesystem or other runtime failures. Maps to CLI exit code 1.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lanegen
