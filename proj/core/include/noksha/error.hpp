#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace noksha {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input stream. `offset` is the byte position where decoding failed.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnsupportedFormatError : public Error {
 public:
  using Error::Error;
};

/// Dimension or shape disagreement between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class OutOfBoundsError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Content hash or checksum disagreement, truncated containers, corrupt archives.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

class UnsupportedVersionError : public Error {
 public:
  using Error::Error;
};

/// Transport failure. Connection problems and 5xx answers may succeed when retried.
class NetworkError : public Error {
 public:
  explicit NetworkError(const std::string& what, bool retryable = true)
      : Error(what), retryable_(retryable) {}
  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

/// A loss or activation became NaN/Inf during training.
class NumericError : public Error {
 public:
  NumericError(const std::string& tensor_name, const std::string& what)
      : Error(what), tensor_(tensor_name) {}
  const std::string& tensor_name() const noexcept { return tensor_; }

 private:
  std::string tensor_;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

}  // namespace noksha
