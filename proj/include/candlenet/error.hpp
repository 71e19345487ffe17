#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace candlenet {

// Base of every error the library throws. The CLI maps the three families
// below onto exit codes (usage 1, data 2, numeric 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument or configuration supplied by the caller.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Input data that cannot be used: bad schema, malformed rows, empty files,
// files of the wrong format version.
class DataError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class EmptyInputError : public DataError {
 public:
  using DataError::DataError;
};

class RowError : public DataError {
 public:
  RowError(std::size_t count, std::size_t first_line, const std::string& detail)
      : DataError(std::to_string(count) + " unparsable row(s); first at line " +
                  std::to_string(first_line) + ": " + detail),
        count_(count),
        first_line_(first_line) {}

  std::size_t count() const { return count_; }
  std::size_t first_line() const { return first_line_; }

 private:
  std::size_t count_;
  std::size_t first_line_;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

// Tensor or layer shapes that do not chain.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Non-finite values during forward/backward passes or training.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::size_t index)
      : Error(what), index_(index) {}

  // Layer index for forward/backward failures, epoch index for divergence.
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

}  // namespace candlenet
