#pragma once

#include <stdexcept>
#include <string>

namespace nasgraph {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input that does not satisfy a documented contract (malformed strings,
/// invalid graphs, bad configuration values).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnknownOperatorError : public ValidationError {
 public:
  explicit UnknownOperatorError(const std::string& name)
      : ValidationError("unknown operator '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class DimensionMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Non-finite values or statistics that are undefined for the given data.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class CorruptFileError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace nasgraph
