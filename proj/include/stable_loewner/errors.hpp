#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sle {

/// Raised when an operation's preconditions on its numeric inputs fail.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine cannot reach its requested accuracy.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double achieved_error)
      : std::runtime_error(what), achieved_error_(achieved_error) {}
  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

/// A point handed to the forward map was swallowed by the hull.
class SwallowedError : public std::runtime_error {
 public:
  SwallowedError(const std::string& what, std::size_t step_index)
      : std::runtime_error(what), step_index_(step_index) {}
  std::size_t step_index() const noexcept { return step_index_; }

 private:
  std::size_t step_index_;
};

/// A regression had nothing to fit (e.g. all box counts equal).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Impossible internal state, e.g. a non-positive height in the backward flow.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace sle
