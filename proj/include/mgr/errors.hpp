#pragma once

#include <stdexcept>
#include <string>

namespace mgr {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration (bad parameters, unknown names).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data that violates a contract (ranges, lengths, empty inputs).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Column lookups and type mismatches against a dataset schema.
class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

/// A guarantee the algorithms rely on was broken. Always a bug.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace mgr
