#pragma once

#include <stdexcept>
#include <string>

namespace cuspeig {

/// Input violates a precondition (bad exponents, point outside the chart, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative method failed to reach its tolerance or hit a degenerate state.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cuspeig
