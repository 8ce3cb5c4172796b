#pragma once

#include <stdexcept>
#include <string>

namespace airway {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on arguments or configuration was violated.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Tensor or volume shapes do not agree.
class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// File-system failure; the message carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents (header syntax, manifest layout).
class ParseError : public IoError {
 public:
  using IoError::IoError;
};

/// Payload byte count differs from what the header implies.
class SizeError : public IoError {
 public:
  using IoError::IoError;
};

class UnsupportedTypeError : public IoError {
 public:
  using IoError::IoError;
};

/// Non-finite values appeared during a numeric procedure.
class NumericError : public Error {
 public:
  using Error::Error;
};

class EmptyMaskError : public Error {
 public:
  using Error::Error;
};

}  // namespace airway
