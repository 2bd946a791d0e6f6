#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tdann {

// Base class for every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value or combination of values violates a documented precondition.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// An index or segment falls outside the addressable range.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Mismatched vector/matrix dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A signal has zero variance where a correlation or normalization needs one.
// Raised instead of silently returning 0 so callers can tell "bad model"
// from "bad data".
class DegenerateSignalError : public Error {
 public:
  using Error::Error;
};

// A linear system is rank-deficient and cannot be solved as requested.
class RankError : public Error {
 public:
  using Error::Error;
};

// A file is missing or cannot be opened.
class FileError : public Error {
 public:
  using Error::Error;
};

// A recording file does not contain the requested channel.
class UnknownChannelError : public Error {
 public:
  using Error::Error;
};

// A structured document has an unknown schema_version or is malformed.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A row of a recording file failed to parse; carries the 1-based row number
// (0 when no specific row applies).
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t row) : Error(message), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_ = 0;
};

// A recording file contains a NaN or infinite value.
class NonFiniteValueError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Grid search finished without producing a single usable configuration.
class NoValidConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace tdann
