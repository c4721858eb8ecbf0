#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace h4g {

/// Caller passed arguments that violate an operation's preconditions
/// (dimension mismatch, empty batch, out-of-range index, bad flag).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inputs are valid but sit on a numerical singularity of the formula.
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A forward or backward pass produced a NaN or infinity.  `where()` names
/// the first offending node of the computation.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(std::string where)
      : std::runtime_error("non-finite value at " + where), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// Malformed dataset or model file.  Line is 1-based; 0 means the binary
/// payload or end of file.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace h4g
