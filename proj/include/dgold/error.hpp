#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dgold {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Cholesky hit a non-positive pivot.
class FactorizationError : public Error {
 public:
  FactorizationError(const std::string& what, std::size_t pivot) : Error(what), pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

/// Malformed or invalid L1PF / label / stacked file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Probability rows outside the row-sum tolerance; carries the first offending row.
class ProbabilityRowError : public FormatError {
 public:
  ProbabilityRowError(const std::string& what, std::size_t row) : FormatError(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// A label is outside [0, n_classes); carries the offending row.
class LabelRangeError : public FormatError {
 public:
  LabelRangeError(const std::string& what, std::size_t row) : FormatError(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class SelectionError : public Error {
 public:
  using Error::Error;
};

class AssemblyError : public Error {
 public:
  using Error::Error;
};

class VoteError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dgold
