#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pvae {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input outside the mathematical domain of an op (e.g. log of a non-positive value).
class DomainError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// Caller broke a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A computation produced NaN/Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed or missing data: corpus files, required example fields, config keys.
class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : DataError(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Invalid configuration value (batch too small, negative weight, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace pvae
