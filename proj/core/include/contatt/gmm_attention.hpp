#pragma once

#include <cstdint>
#include <vector>

#include "contatt/densities.hpp"

namespace contatt {

/// Discrete attention: weights w_l >= 0 over locations t_l, summing to one.
struct DiscreteAttention {
  std::vector<double> locations;
  std::vector<double> weights;

  std::size_t size() const noexcept { return locations.size(); }
  /// Throws ArgumentError on shape mismatch, negative weights or |sum - 1| > 1e-12.
  void validate() const;
  /// Normalizes arbitrary non-negative scores into weights.
  static DiscreteAttention from_scores(std::vector<double> locations, const std::vector<double>& scores);
};

/// Joint sufficient statistics of (T, Z) for a K-component mixture, laid out as
/// [I(z=1), ..., I(z=K-1), I(z=1)t, I(z=1)t^2, ..., I(z=K)t, I(z=K)t^2];
/// length M = (K - 1) + 2K.
struct JointSuffStats {
  int components = 0;
  std::vector<double> values;
  /// Components whose total responsibility fell below 1e-12.
  std::vector<int> starved;

  double indicator(int k) const { return values.at(k); }
  double first(int k) const { return values.at(components - 1 + 2 * k); }
  double second(int k) const { return values.at(components - 1 + 2 * k + 1); }
};

inline constexpr double kDefaultVarianceFloor = 1e-6;
inline constexpr double kStarvationThreshold = 1e-12;

/// Posterior p(Z = k | t) under `mixture`, one row per location.
std::vector<std::vector<double>> responsibilities(const GaussianMixtureDensity& mixture,
                                                  const std::vector<double>& locations);

/// sum_l w_l sum_k p_old(Z = k | t_l) phi(t_l, k), responsibilities taken
/// from `responsibilities_from`. `params` only fixes the component count.
JointSuffStats expected_joint_stats(const GaussianMixtureDensity& params, const DiscreteAttention& att,
                                    const GaussianMixtureDensity& responsibilities_from);

/// E_{p(T,Z)}[phi] in closed form: (pi_k, pi_k mu_k, pi_k (sigma_k^2 + mu_k^2)).
JointSuffStats model_joint_stats(const GaussianMixtureDensity& params);

/// sum_l w_l log sum_k pi_k N(t_l; mu_k, sigma_k^2).
double weighted_log_likelihood(const GaussianMixtureDensity& mixture, const DiscreteAttention& att);

/// One exact M-step: moments matched to the expected joint statistics.
GaussianMixtureDensity m_step(const JointSuffStats& stats, double variance_floor = kDefaultVarianceFloor);

/// K-quantile means of the weighted empirical distribution, global weighted
/// variance, uniform mixing weights.
GaussianMixtureDensity default_em_init(const DiscreteAttention& att, int components,
                                       double variance_floor = kDefaultVarianceFloor);

struct EmOptions {
  int max_iters = 200;
  double tol = 1e-10;
  double variance_floor = kDefaultVarianceFloor;
  std::uint64_t seed = 0;
};

struct EmFit {
  GaussianMixtureDensity mixture;
  bool converged = false;
  int iterations = 0;
  /// Weighted log-likelihood before the first and after every iteration.
  std::vector<double> log_likelihood;
  /// Moment-matching residual of every M-step.
  std::vector<double> moment_residual;
  /// Per M-step: true when the variance floor bound or a starved component
  /// was reset, so the step is not the unconstrained weighted MLE.
  std::vector<bool> constrained;
  /// Number of starved-component resets performed.
  int resets = 0;
};

/// Weighted EM. Throws ArgumentError when K exceeds the number of locations.
EmFit weighted_em_fit(const DiscreteAttention& att, int components, const GaussianMixtureDensity& init,
                      const EmOptions& options = {});
EmFit weighted_em_fit(const DiscreteAttention& att, int components, const EmOptions& options = {});

/// || E_{p_new(T,Z)}[phi] - sum_l w_l sum_k p_old(k | t_l) phi(t_l, k) ||_inf
double verify_moment_matching(const GaussianMixtureDensity& params_new, const GaussianMixtureDensity& params_old,
                              const DiscreteAttention& att);

} // namespace contatt
