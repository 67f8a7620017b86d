#pragma once

#include <vector>

#include <Eigen/Dense>

#include "contatt/base_density.hpp"

namespace contatt {

/// N Gaussian RBFs psi_n(t) = exp(-(t - c_n)^2 / (2 width^2)).
class BasisSet {
public:
  /// Centers evenly spaced over `domain` (endpoints included), width equal
  /// to the center spacing (the domain length when N == 1).
  static BasisSet uniform(const Interval& domain, int count);

  /// Explicit sorted centers and a shared width.
  BasisSet(std::vector<double> centers, double width);

  int size() const noexcept { return static_cast<int>(centers_.size()); }
  const std::vector<double>& centers() const noexcept { return centers_; }
  double width() const noexcept { return width_; }

  Eigen::VectorXd eval(double t) const;
  /// N x L matrix of basis values at `times` (F in the ridge problem).
  Eigen::MatrixXd design(const std::vector<double>& times) const;

private:
  std::vector<double> centers_;
  double width_;
  double inv_two_w2_;
};

/// Irregularly sampled series: strictly increasing times and an O x L value matrix.
struct TimeSeries {
  std::vector<double> times;
  Eigen::MatrixXd values;

  int length() const noexcept { return static_cast<int>(times.size()); }
  int dims() const noexcept { return static_cast<int>(values.rows()); }
  /// Throws ArgumentError on unsorted times, shape mismatch or non-finite values.
  void validate() const;
};

/// V(t) = B Psi(t), B is O x N.
struct ValueParams {
  Eigen::MatrixXd B;
};

Eigen::VectorXd eval_basis(const BasisSet& basis, double t);

/// Ridge solution B* = H F^T (F F^T + lambda I)^{-1}. When lambda == 0 and
/// F F^T is singular a 1e-12 jitter is added to the diagonal.
ValueParams fit_ridge(const TimeSeries& series, const BasisSet& basis, double lambda);

/// ||B F - H||_F^2 + lambda ||B||_F^2
double ridge_objective(const ValueParams& params, const TimeSeries& series, const BasisSet& basis, double lambda);

Eigen::VectorXd value_eval(const ValueParams& params, const BasisSet& basis, double t);

} // namespace contatt
