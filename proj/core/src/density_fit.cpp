#include "contatt/density_fit.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Dense>

#include "contatt/errors.hpp"

namespace contatt {
namespace {

struct Evaluation {
  KernelDeformedDensity density;
  double loss = 0.0;
  Eigen::VectorXd gradient;
};

class L2Objective {
public:
  L2Objective(const RealFn& target, const BaseDensity& base, std::vector<double> points, const Kernel& kernel,
              const AlphaParam& alpha, const DeformedFitOptions& options)
      : base_(base), points_(std::move(points)), kernel_(kernel), alpha_(alpha),
        grid_(build_rule(base, options.grid_panels, options.grid_nodes_per_panel)),
        density_rule_(build_rule(base, options.density_panels, options.density_nodes_per_panel)) {
    target_.resize(static_cast<Eigen::Index>(grid_.size()));
    for (std::size_t j = 0; j < grid_.size(); ++j) {
      target_[static_cast<Eigen::Index>(j)] = target(grid_.nodes[j]);
    }
    K_grid_.resize(static_cast<Eigen::Index>(points_.size()), static_cast<Eigen::Index>(grid_.size()));
    for (std::size_t i = 0; i < points_.size(); ++i) {
      for (std::size_t j = 0; j < grid_.size(); ++j) {
        K_grid_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kernel_(grid_.nodes[j], points_[i]);
      }
    }
  }

  std::optional<Evaluation> operator()(const Eigen::VectorXd& coeffs, bool with_gradient) const {
    RkhsFunction f({coeffs.data(), coeffs.data() + coeffs.size()}, points_, kernel_);
    NormalizeOptions fixed{false, 1e-8, 1 << 14};
    std::optional<KernelDeformedDensity> density;
    try {
      density = normalize_kdeformed(f, alpha_, base_, density_rule_, fixed);
    } catch (const DegenerateDensityError&) {
      return std::nullopt;
    }
    const double beta = alpha_.beta();
    const auto J = static_cast<Eigen::Index>(grid_.size());
    Eigen::VectorXd p(J);
    Eigen::VectorXd escort(J);
    for (Eigen::Index j = 0; j < J; ++j) {
      const double t = grid_.nodes[static_cast<std::size_t>(j)];
      if (!density->support.contains(t)) {
        p[j] = 0.0;
        escort[j] = 0.0;
        continue;
      }
      const double u = beta_exp(f(t), beta);
      p[j] = u / density->Z;
      escort[j] = u > 0.0 ? (beta == 0.0 ? 1.0 : std::pow(u, beta)) : 0.0;
    }
    const Eigen::Map<const Eigen::VectorXd> w(grid_.weights.data(), J);
    const Eigen::VectorXd resid = p - target_;
    Evaluation e{std::move(*density), w.dot(resid.cwiseAbs2()), {}};
    if (with_gradient) {
      // dZ/dgamma_i = int p_tilde^{2-a} k(., t_i) dQ on the density's own rule.
      const QuadratureRule& rule = e.density.rule;
      Eigen::VectorXd dZ = Eigen::VectorXd::Zero(coeffs.size());
      for (std::size_t j = 0; j < rule.size(); ++j) {
        const double u = e.density.node_unnormalized[j];
        const double s = u > 0.0 ? (beta == 0.0 ? 1.0 : std::pow(u, beta)) : 0.0;
        for (std::size_t i = 0; i < points_.size(); ++i) {
          dZ[static_cast<Eigen::Index>(i)] += rule.weights[j] * s * kernel_(rule.nodes[j], points_[i]);
        }
      }
      const Eigen::VectorXd wr = 2.0 * w.cwiseProduct(resid);
      // dp_j/dgamma_i = (s_j k_ij - p_j dZ_i) / Z
      e.gradient = (K_grid_ * wr.cwiseProduct(escort) - dZ * wr.dot(p)) / e.density.Z;
    }
    return e;
  }

  double l1(const KernelDeformedDensity& d, const Eigen::VectorXd& coeffs) const {
    RkhsFunction f({coeffs.data(), coeffs.data() + coeffs.size()}, points_, kernel_);
    double acc = 0.0;
    for (std::size_t j = 0; j < grid_.size(); ++j) {
      const double t = grid_.nodes[j];
      const double p = d.support.contains(t) ? beta_exp(f(t), alpha_.beta()) / d.Z : 0.0;
      acc += grid_.weights[j] * std::abs(p - target_[static_cast<Eigen::Index>(j)]);
    }
    return acc;
  }

private:
  BaseDensity base_;
  std::vector<double> points_;
  Kernel kernel_;
  AlphaParam alpha_;
  QuadratureRule grid_;
  QuadratureRule density_rule_;
  Eigen::VectorXd target_;
  Eigen::MatrixXd K_grid_;
};

} // namespace

DeformedFit fit_kdeformed_l2(const RealFn& target, const BaseDensity& base, std::vector<double> points,
                             const Kernel& kernel, const AlphaParam& alpha, const DeformedFitOptions& options) {
  if (points.empty()) {
    throw ArgumentError("fit needs at least one inducing point");
  }
  const L2Objective objective(target, base, points, kernel, alpha, options);
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(points.size()));
  std::optional<Evaluation> current = objective(coeffs, true);
  if (!current) {
    throw DegenerateDensityError("initial fit density is degenerate");
  }
  double step = options.initial_step;
  int iter = 0;
  for (; iter < options.max_iters; ++iter) {
    const Eigen::VectorXd trial = coeffs - step * current->gradient;
    std::optional<Evaluation> next = objective(trial, true);
    if (!next || next->loss >= current->loss) {
      step *= 0.5;
      if (step < 1e-14) {
        break;
      }
      continue;
    }
    const double decrease = (current->loss - next->loss) / std::max(current->loss, 1e-300);
    coeffs = trial;
    current = std::move(next);
    step *= 1.2;
    if (decrease < options.tol) {
      break;
    }
  }
  DeformedFit fit{{coeffs.data(), coeffs.data() + coeffs.size()}, current->density, current->loss, 0.0, iter};
  fit.l1_error = objective.l1(fit.density, coeffs);
  return fit;
}

} // namespace contatt
