#include "contatt/value_function.hpp"

#include <cmath>

#include "contatt/errors.hpp"

namespace contatt {

BasisSet BasisSet::uniform(const Interval& domain, int count) {
  if (count < 1) {
    throw ArgumentError("basis needs at least one function");
  }
  if (count == 1) {
    return BasisSet({0.5 * (domain.lo + domain.hi)}, domain.length());
  }
  std::vector<double> centers(count);
  for (int n = 0; n < count; ++n) {
    centers[n] = domain.lo + domain.length() * n / (count - 1);
  }
  return BasisSet(std::move(centers), domain.length() / (count - 1));
}

BasisSet::BasisSet(std::vector<double> centers, double width)
    : centers_(std::move(centers)), width_(width), inv_two_w2_(1.0 / (2.0 * width * width)) {
  if (centers_.empty()) {
    throw ArgumentError("basis needs at least one function");
  }
  if (!(width > 0.0)) {
    throw ArgumentError("basis width must be positive");
  }
  for (std::size_t n = 1; n < centers_.size(); ++n) {
    if (!(centers_[n] > centers_[n - 1])) {
      throw ArgumentError("basis centers must be strictly increasing");
    }
  }
}

Eigen::VectorXd BasisSet::eval(double t) const {
  Eigen::VectorXd out(size());
  for (int n = 0; n < size(); ++n) {
    const double d = t - centers_[n];
    out[n] = std::exp(-d * d * inv_two_w2_);
  }
  return out;
}

Eigen::MatrixXd BasisSet::design(const std::vector<double>& times) const {
  Eigen::MatrixXd F(size(), static_cast<Eigen::Index>(times.size()));
  for (std::size_t l = 0; l < times.size(); ++l) {
    F.col(static_cast<Eigen::Index>(l)) = eval(times[l]);
  }
  return F;
}

void TimeSeries::validate() const {
  if (times.empty()) {
    throw ArgumentError("time series needs at least one observation");
  }
  if (values.cols() != static_cast<Eigen::Index>(times.size()) || values.rows() < 1) {
    throw ArgumentError("time series values must be O x L with L = number of times");
  }
  for (std::size_t l = 1; l < times.size(); ++l) {
    if (!(times[l] > times[l - 1])) {
      throw ArgumentError("time series times must be strictly increasing");
    }
  }
  if (!values.allFinite()) {
    throw ArgumentError("time series contains non-finite values");
  }
}

Eigen::VectorXd eval_basis(const BasisSet& basis, double t) { return basis.eval(t); }

ValueParams fit_ridge(const TimeSeries& series, const BasisSet& basis, double lambda) {
  series.validate();
  if (!(lambda >= 0.0)) {
    throw ArgumentError("ridge lambda must be non-negative");
  }
  const Eigen::MatrixXd F = basis.design(series.times);
  Eigen::MatrixXd gram = F * F.transpose();
  gram.diagonal().array() += lambda;
  const Eigen::MatrixXd rhs = F * series.values.transpose();

  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    gram.diagonal().array() += 1e-12;
    llt.compute(gram);
    if (llt.info() != Eigen::Success) {
      throw NumericError("ridge normal equations are not positive definite");
    }
  }
  ValueParams params{llt.solve(rhs).transpose()};
  if (!params.B.allFinite()) {
    throw NumericError("ridge solve produced non-finite coefficients");
  }
  return params;
}

double ridge_objective(const ValueParams& params, const TimeSeries& series, const BasisSet& basis, double lambda) {
  const Eigen::MatrixXd F = basis.design(series.times);
  return (params.B * F - series.values).squaredNorm() + lambda * params.B.squaredNorm();
}

Eigen::VectorXd value_eval(const ValueParams& params, const BasisSet& basis, double t) {
  return params.B * basis.eval(t);
}

} // namespace contatt
