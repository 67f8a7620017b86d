#include "contatt/base_density.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "contatt/errors.hpp"

namespace contatt {

BaseDensity BaseDensity::gaussian(double mu, double sigma, double truncation) {
  if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma)) {
    throw ArgumentError("gaussian base needs finite mu and sigma > 0");
  }
  if (!(truncation > 0.0)) {
    throw ArgumentError("gaussian base truncation must be positive");
  }
  return BaseDensity(Kind::gaussian, mu, sigma, truncation,
                     {mu - truncation * sigma, mu + truncation * sigma});
}

BaseDensity BaseDensity::uniform(double lo, double hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw ArgumentError("uniform base needs finite lo < hi");
  }
  const double mean = 0.5 * (lo + hi);
  const double sd = (hi - lo) / std::sqrt(12.0);
  return BaseDensity(Kind::uniform, mean, sd, 0.0, {lo, hi});
}

double BaseDensity::q0(double t) const noexcept {
  if (kind_ == Kind::uniform) {
    return domain_.contains(t) ? 1.0 / domain_.length() : 0.0;
  }
  const double z = (t - a_) / b_;
  return std::exp(-0.5 * z * z) / (b_ * std::sqrt(2.0 * std::numbers::pi));
}

std::string BaseDensity::describe() const {
  std::ostringstream os;
  if (kind_ == Kind::uniform) {
    os << "Uniform(" << domain_.lo << ", " << domain_.hi << ")";
  } else {
    os << "Gaussian(" << a_ << ", " << b_ << ") truncated at +/-" << truncation_ << " sd";
  }
  return os.str();
}

} // namespace contatt
