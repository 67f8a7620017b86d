#include "contatt/deformed_math.hpp"

#include <cmath>
#include <string>

#include "contatt/errors.hpp"

namespace contatt {

AlphaParam::AlphaParam(double alpha) : alpha_(alpha) {
  if (!(alpha > 1.0 && alpha <= 2.0)) {
    throw ArgumentError("alpha must lie in (1, 2], got " + std::to_string(alpha));
  }
}

double beta_exp(double x, double beta) noexcept {
  if (beta == 1.0) {
    return std::exp(x);
  }
  const double base = 1.0 + (1.0 - beta) * x;
  if (base <= 0.0) {
    return 0.0;
  }
  if (beta == 0.0) {
    return base;
  }
  // log1p keeps the 1/(1-beta) power from amplifying the rounding of `base`.
  return std::exp(std::log1p((1.0 - beta) * x) / (1.0 - beta));
}

double beta_log(double x, double beta) {
  if (!(x > 0.0)) {
    throw ArgumentError("beta_log is undefined for x <= 0");
  }
  if (beta == 1.0) {
    return std::log(x);
  }
  return std::expm1((1.0 - beta) * std::log(x)) / (1.0 - beta);
}

double beta_exp_derivative(double x, double beta) noexcept {
  const double value = beta_exp(x, beta);
  if (value == 0.0) {
    return 0.0;
  }
  return beta == 0.0 ? 1.0 : std::pow(value, beta);
}

} // namespace contatt
