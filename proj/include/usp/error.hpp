#pragma once

#include <stdexcept>
#include <string>

namespace usp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NegativeCount : public Error {
 public:
  NegativeCount(std::size_t row, std::size_t col, long long value)
      : Error("negative count " + std::to_string(value) + " at row " + std::to_string(row + 1) +
              ", column " + std::to_string(col + 1)),
        row_(row),
        col_(col) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

class EmptyTable : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class InvalidDistribution : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// n = 0 where a statistic needs at least one observation.
class EmptySample : public Error {
 public:
  using Error::Error;
};

class SampleTooSmall : public Error {
 public:
  using Error::Error;
};

class SampleTooLargeForOracle : public Error {
 public:
  using Error::Error;
};

class SubsampleTooLarge : public Error {
 public:
  using Error::Error;
};

/// Pearson / G statistic requested on a table with an empty row or column.
class UndefinedStatistic : public Error {
 public:
  using Error::Error;
};

class DivergenceUndefined : public Error {
 public:
  using Error::Error;
};

class InvalidMode : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class InfeasibleEpsilon : public Error {
 public:
  using Error::Error;
};

}  // namespace usp
