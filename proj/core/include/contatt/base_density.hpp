#pragma once

#include <string>

namespace contatt {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const noexcept { return hi - lo; }
  bool contains(double t) const noexcept { return t >= lo && t <= hi; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Reference measure Q with Lebesgue density q0, restricted to a finite
/// integration domain. Gaussian bases are truncated at mu +/- truncation*sigma
/// (8 sigma by default, outside mass < 1e-15); uniform bases use [lo, hi].
class BaseDensity {
public:
  enum class Kind { gaussian, uniform };

  static BaseDensity gaussian(double mu, double sigma, double truncation = 8.0);
  static BaseDensity uniform(double lo, double hi);

  Kind kind() const noexcept { return kind_; }
  double q0(double t) const noexcept;
  Interval domain() const noexcept { return domain_; }

  // Gaussian parameters; for a uniform base these are its mean and sd.
  double mu() const noexcept { return a_; }
  double sigma() const noexcept { return b_; }
  double truncation() const noexcept { return truncation_; }

  std::string describe() const;

  friend bool operator==(const BaseDensity&, const BaseDensity&) = default;

private:
  BaseDensity(Kind kind, double a, double b, double truncation, Interval domain)
      : kind_(kind), a_(a), b_(b), truncation_(truncation), domain_(domain) {}

  Kind kind_;
  double a_;
  double b_;
  double truncation_;
  Interval domain_;
};

} // namespace contatt
