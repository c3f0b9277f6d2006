#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or dimensions supplied by the caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

// ---- numeric failures --------------------------------------------------

class NumericError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public NumericError {
 public:
  using NumericError::NumericError;
};

// The efficient weighting matrix S-hat failed the SPD check (rank deficiency).
class SingularWeighting : public NumericError {
 public:
  using NumericError::NumericError;
};

// B' S^-1 B vanishes, so alpha is not identified by the supplied moments.
class DegenerateMoments : public NumericError {
 public:
  using NumericError::NumericError;
};

// ---- data failures -----------------------------------------------------

class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : DataError(what), row_(row), column_(column) {}

  // 1-based line number in the input file, and 1-based field index.
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class LengthMismatch : public DataError {
 public:
  using DataError::DataError;
};

class TooShort : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace fr
