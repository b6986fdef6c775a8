#pragma once

#include <stdexcept>
#include <string>

namespace aclgate {

// Error taxonomy aligned with the CLI exit codes:
//   UsageError -> 1, DataError/ConfigError -> 2, ResourceError -> 4.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Caller misuse: violated precondition, bad flag combination.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed or internally inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration (model registry shape, unknown covert encoding).
class ConfigError : public DataError {
 public:
  using DataError::DataError;
};

// A cap or budget was exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

}  // namespace aclgate
