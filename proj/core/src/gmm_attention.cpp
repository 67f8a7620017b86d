#include "contatt/gmm_attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "contatt/errors.hpp"

namespace contatt {
namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double log_normal(double t, double mu, double var) {
  const double d = t - mu;
  return -0.5 * d * d / var - 0.5 * std::log(var) - kLogSqrt2Pi;
}

double log_mixture(const GaussianMixtureDensity& m, double t, std::vector<double>& logs) {
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < m.size(); ++k) {
    logs[k] = m.weights[k] > 0.0 ? std::log(m.weights[k]) + log_normal(t, m.means[k], m.variances[k])
                                 : -std::numeric_limits<double>::infinity();
    shift = std::max(shift, logs[k]);
  }
  double acc = 0.0;
  for (double l : logs) {
    acc += std::exp(l - shift);
  }
  return shift + std::log(acc);
}

} // namespace

void DiscreteAttention::validate() const {
  if (locations.empty() || locations.size() != weights.size()) {
    throw ArgumentError("discrete attention needs matching, non-empty locations and weights");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) {
      throw ArgumentError("discrete attention weights must be non-negative");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ArgumentError("discrete attention weights must sum to 1");
  }
}

DiscreteAttention DiscreteAttention::from_scores(std::vector<double> locations, const std::vector<double>& scores) {
  if (locations.size() != scores.size() || scores.empty()) {
    throw ArgumentError("scores and locations must have the same non-zero length");
  }
  const double total = std::accumulate(scores.begin(), scores.end(), 0.0);
  if (!(total > 0.0)) {
    throw ArgumentError("scores must have positive total");
  }
  DiscreteAttention att{std::move(locations), {}};
  att.weights.reserve(scores.size());
  for (double s : scores) {
    if (!(s >= 0.0)) {
      throw ArgumentError("scores must be non-negative");
    }
    att.weights.push_back(s / total);
  }
  return att;
}

std::vector<std::vector<double>> responsibilities(const GaussianMixtureDensity& mixture,
                                                  const std::vector<double>& locations) {
  std::vector<std::vector<double>> out(locations.size(), std::vector<double>(mixture.size()));
  std::vector<double> logs(mixture.size());
  for (std::size_t l = 0; l < locations.size(); ++l) {
    const double total = log_mixture(mixture, locations[l], logs);
    for (std::size_t k = 0; k < mixture.size(); ++k) {
      out[l][k] = std::exp(logs[k] - total);
    }
  }
  return out;
}

JointSuffStats expected_joint_stats(const GaussianMixtureDensity& params, const DiscreteAttention& att,
                                    const GaussianMixtureDensity& responsibilities_from) {
  if (params.size() != responsibilities_from.size()) {
    throw ArgumentError("component counts differ between parameter sets");
  }
  att.validate();
  const int K = static_cast<int>(params.size());
  const auto resp = responsibilities(responsibilities_from, att.locations);
  std::vector<double> mass(K, 0.0);
  std::vector<double> first(K, 0.0);
  std::vector<double> second(K, 0.0);
  for (std::size_t l = 0; l < att.size(); ++l) {
    const double t = att.locations[l];
    for (int k = 0; k < K; ++k) {
      const double wr = att.weights[l] * resp[l][k];
      mass[k] += wr;
      first[k] += wr * t;
      second[k] += wr * t * t;
    }
  }
  JointSuffStats stats;
  stats.components = K;
  stats.values.assign(static_cast<std::size_t>(3 * K - 1), 0.0);
  for (int k = 0; k < K; ++k) {
    if (k < K - 1) {
      stats.values[k] = mass[k];
    }
    stats.values[K - 1 + 2 * k] = first[k];
    stats.values[K - 1 + 2 * k + 1] = second[k];
    if (mass[k] < kStarvationThreshold) {
      stats.starved.push_back(k);
    }
  }
  return stats;
}

JointSuffStats model_joint_stats(const GaussianMixtureDensity& params) {
  const int K = static_cast<int>(params.size());
  JointSuffStats stats;
  stats.components = K;
  stats.values.assign(static_cast<std::size_t>(3 * K - 1), 0.0);
  for (int k = 0; k < K; ++k) {
    const double pi = params.weights[k];
    const double mu = params.means[k];
    if (k < K - 1) {
      stats.values[k] = pi;
    }
    stats.values[K - 1 + 2 * k] = pi * mu;
    stats.values[K - 1 + 2 * k + 1] = pi * (params.variances[k] + mu * mu);
  }
  return stats;
}

double weighted_log_likelihood(const GaussianMixtureDensity& mixture, const DiscreteAttention& att) {
  std::vector<double> logs(mixture.size());
  double acc = 0.0;
  for (std::size_t l = 0; l < att.size(); ++l) {
    if (att.weights[l] > 0.0) {
      acc += att.weights[l] * log_mixture(mixture, att.locations[l], logs);
    }
  }
  return acc;
}

GaussianMixtureDensity m_step(const JointSuffStats& stats, double variance_floor) {
  const int K = stats.components;
  GaussianMixtureDensity out;
  out.weights.resize(K);
  out.means.resize(K);
  out.variances.resize(K);
  double head = 0.0;
  for (int k = 0; k < K - 1; ++k) {
    out.weights[k] = stats.indicator(k);
    head += out.weights[k];
  }
  out.weights[K - 1] = std::max(0.0, 1.0 - head);
  for (int k = 0; k < K; ++k) {
    const double mass = out.weights[k];
    if (mass < kStarvationThreshold) {
      out.means[k] = 0.0;
      out.variances[k] = variance_floor;
      continue;
    }
    const double mu = stats.first(k) / mass;
    out.means[k] = mu;
    out.variances[k] = std::max(variance_floor, stats.second(k) / mass - mu * mu);
  }
  return out;
}

GaussianMixtureDensity default_em_init(const DiscreteAttention& att, int components, double variance_floor) {
  att.validate();
  if (components < 1) {
    throw ArgumentError("need at least one mixture component");
  }
  std::vector<std::size_t> order(att.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return att.locations[a] < att.locations[b]; });
  double mean = 0.0;
  for (std::size_t l = 0; l < att.size(); ++l) {
    mean += att.weights[l] * att.locations[l];
  }
  double var = 0.0;
  for (std::size_t l = 0; l < att.size(); ++l) {
    const double d = att.locations[l] - mean;
    var += att.weights[l] * d * d;
  }
  GaussianMixtureDensity init;
  init.weights.assign(components, 1.0 / components);
  init.variances.assign(components, std::max(variance_floor, var));
  for (int k = 0; k < components; ++k) {
    const double level = (k + 0.5) / components;
    double cumulative = 0.0;
    double chosen = att.locations[order.back()];
    for (std::size_t idx : order) {
      cumulative += att.weights[idx];
      if (cumulative >= level) {
        chosen = att.locations[idx];
        break;
      }
    }
    init.means.push_back(chosen);
  }
  return init;
}

EmFit weighted_em_fit(const DiscreteAttention& att, int components, const GaussianMixtureDensity& init,
                      const EmOptions& options) {
  att.validate();
  init.validate();
  if (components < 1) {
    throw ArgumentError("need at least one mixture component");
  }
  if (static_cast<std::size_t>(components) > att.size()) {
    throw ArgumentError("more mixture components (" + std::to_string(components) + ") than locations (" +
                        std::to_string(att.size()) + ")");
  }
  if (init.size() != static_cast<std::size_t>(components)) {
    throw ArgumentError("initial mixture has the wrong number of components");
  }
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, att.size() - 1);

  EmFit fit;
  fit.mixture = init;
  double previous = weighted_log_likelihood(fit.mixture, att);
  fit.log_likelihood.push_back(previous);
  const double global_var = default_em_init(att, 1, options.variance_floor).variances.front();

  for (int iter = 0; iter < options.max_iters; ++iter) {
    const JointSuffStats stats = expected_joint_stats(fit.mixture, att, fit.mixture);
    GaussianMixtureDensity next = m_step(stats, options.variance_floor);
    fit.moment_residual.push_back(verify_moment_matching(next, fit.mixture, att));
    bool floored = false;
    for (int k = 0; k < components; ++k) {
      const double mass = next.weights[k];
      if (mass >= kStarvationThreshold) {
        const double mu = stats.first(k) / mass;
        floored = floored || stats.second(k) / mass - mu * mu < options.variance_floor;
      }
    }
    fit.constrained.push_back(floored || !stats.starved.empty());
    if (!stats.starved.empty()) {
      for (int k : stats.starved) {
        next.means[k] = att.locations[pick(rng)];
        next.variances[k] = global_var;
        next.weights[k] = 1.0 / components;
        ++fit.resets;
      }
      const double total = std::accumulate(next.weights.begin(), next.weights.end(), 0.0);
      for (double& w : next.weights) {
        w /= total;
      }
    }
    fit.mixture = std::move(next);
    fit.iterations = iter + 1;
    const double current = weighted_log_likelihood(fit.mixture, att);
    fit.log_likelihood.push_back(current);
    if (stats.starved.empty() && current - previous < options.tol) {
      fit.converged = true;
      break;
    }
    previous = current;
  }
  return fit;
}

EmFit weighted_em_fit(const DiscreteAttention& att, int components, const EmOptions& options) {
  if (components < 1) {
    throw ArgumentError("need at least one mixture component");
  }
  if (static_cast<std::size_t>(components) > att.size()) {
    throw ArgumentError("more mixture components than locations");
  }
  return weighted_em_fit(att, components, default_em_init(att, components, options.variance_floor), options);
}

double verify_moment_matching(const GaussianMixtureDensity& params_new, const GaussianMixtureDensity& params_old,
                              const DiscreteAttention& att) {
  const JointSuffStats model = model_joint_stats(params_new);
  const JointSuffStats empirical = expected_joint_stats(params_new, att, params_old);
  double worst = 0.0;
  for (std::size_t m = 0; m < model.values.size(); ++m) {
    worst = std::max(worst, std::abs(model.values[m] - empirical.values[m]));
  }
  return worst;
}

} // namespace contatt
