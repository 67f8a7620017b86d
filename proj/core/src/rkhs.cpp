#include "contatt/rkhs.hpp"

#include <cmath>

#include "contatt/errors.hpp"

namespace contatt {

Kernel Kernel::gaussian_rbf(double bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw ArgumentError("kernel bandwidth must be positive and finite");
  }
  return Kernel(Kind::gaussian_rbf, bandwidth);
}

RkhsFunction::RkhsFunction(std::vector<double> coeffs, std::vector<double> points, Kernel kernel)
    : coeffs_(std::move(coeffs)), points_(std::move(points)), kernel_(kernel) {
  if (coeffs_.empty() || coeffs_.size() != points_.size()) {
    throw ArgumentError("RKHS function needs matching, non-empty coefficient and point arrays");
  }
}

double RkhsFunction::operator()(double t) const noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    acc += coeffs_[i] * kernel_(t, points_[i]);
  }
  return acc;
}

double rkhs_eval(const RkhsFunction& f, double t) noexcept { return f(t); }

Eigen::MatrixXd gram_matrix(const Kernel& kernel, const std::vector<double>& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      gram(i, j) = kernel(points[i], points[j]);
      gram(j, i) = gram(i, j);
    }
  }
  return gram;
}

bool check_normalizable(const GrowthProfile& growth, const TailProfile& tail) noexcept {
  if (growth.xi == 0.0) {
    return true;
  }
  return tail.eta > growth.xi / 2.0;
}

std::vector<double> default_inducing_points(const Interval& domain, int count) {
  if (count < 1) {
    throw ArgumentError("need at least one inducing point");
  }
  if (count == 1) {
    return {0.5 * (domain.lo + domain.hi)};
  }
  std::vector<double> points(count);
  for (int i = 0; i < count; ++i) {
    points[i] = domain.lo + domain.length() * i / (count - 1);
  }
  return points;
}

double default_bandwidth(const Interval& domain, int count) {
  if (count < 1) {
    throw ArgumentError("need at least one inducing point");
  }
  return domain.length() / (10.0 * count);
}

} // namespace contatt
