#pragma once

#include <stdexcept>
#include <string>

namespace copmix {

// A family parameter outside its admissible range.
class OutOfRangeParameter : public std::invalid_argument {
public:
  OutOfRangeParameter(std::string parameter, std::string allowed_range, double value)
      : std::invalid_argument("parameter '" + parameter + "' = " + std::to_string(value) +
                              " outside allowed range " + allowed_range),
        parameter_(std::move(parameter)),
        allowed_range_(std::move(allowed_range)) {}

  const std::string& parameter() const noexcept { return parameter_; }
  const std::string& allowed_range() const noexcept { return allowed_range_; }

private:
  std::string parameter_;
  std::string allowed_range_;
};

// Mixture weights that are negative or do not sum to one.
class BadWeights : public std::invalid_argument {
public:
  explicit BadWeights(const std::string& what) : std::invalid_argument(what) {}
};

// A quadrature or special-function evaluation missed its error target.
class NumericalFailure : public std::runtime_error {
public:
  NumericalFailure(const std::string& what, double achieved_error)
      : std::runtime_error(what + " (achieved error " + std::to_string(achieved_error) + ")"),
        achieved_error_(achieved_error) {}

  double achieved_error() const noexcept { return achieved_error_; }

private:
  double achieved_error_;
};

// An iteration exhausted its budget before reaching tolerance.
class NoConvergence : public std::runtime_error {
public:
  NoConvergence(const std::string& what, double bracket_width, long step_index = -1)
      : std::runtime_error(what + " (bracket width " + std::to_string(bracket_width) + ")"),
        bracket_width_(bracket_width),
        step_index_(step_index) {}

  double bracket_width() const noexcept { return bracket_width_; }
  long step_index() const noexcept { return step_index_; }

private:
  double bracket_width_;
  long step_index_;
};

// Two transition matrices of different grid resolution were combined.
class ResolutionMismatch : public std::invalid_argument {
public:
  ResolutionMismatch(int lhs, int rhs)
      : std::invalid_argument("resolution mismatch: " + std::to_string(lhs) + " vs " +
                              std::to_string(rhs)) {}
};

// A simulated path too short for the requested estimator.
class TooShort : public std::invalid_argument {
public:
  TooShort(std::size_t length, std::size_t required)
      : std::invalid_argument("path of length " + std::to_string(length) +
                              " is shorter than required " + std::to_string(required)) {}
};

}  // namespace copmix
