#pragma once

#include <stdexcept>
#include <string>

namespace contatt {

/// Invalid input: bad shapes, out-of-range parameters, points outside a domain.
class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite intermediate values or a quadrature that failed to converge.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A density whose normalizer vanishes (empty support, zero escort mass).
class DegenerateDensityError : public NumericError {
public:
  using NumericError::NumericError;
};

/// An operation that needs state produced by an earlier call (e.g. backward before forward).
class StateError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

} // namespace contatt
