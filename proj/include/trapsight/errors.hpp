#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace trapsight {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two rasters that must share a shape do not.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A value violated a configuration invariant.
class ConfigError : public Error {
 public:
  struct Field {
    std::string field;
    std::string message;
  };

  explicit ConfigError(const std::string& what) : Error(what) {}
  ConfigError(const std::string& what, std::vector<Field> fields)
      : Error(what), fields_(std::move(fields)) {}

  const std::vector<Field>& fields() const noexcept { return fields_; }

 private:
  std::vector<Field> fields_;
};

// A query range with from > to, or an unparsable range bound.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Bytes that are not a supported image encoding.
class DecodeError : public Error {
 public:
  using Error::Error;
};

// Persistence failures: disk I/O, dangling references, corrupt records.
class StoreError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public StoreError {
 public:
  using StoreError::StoreError;
};

}  // namespace trapsight
