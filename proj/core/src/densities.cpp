#include "contatt/densities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "contatt/errors.hpp"

namespace contatt {
namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double normal_logpdf(double t, double mu, double var) {
  const double d = t - mu;
  return -0.5 * d * d / var - 0.5 * std::log(var) - kLogSqrt2Pi;
}

void check_in_domain(const BaseDensity& base, double t) {
  if (!base.domain().contains(t)) {
    throw ArgumentError("t = " + std::to_string(t) + " lies outside the density domain [" +
                        std::to_string(base.domain().lo) + ", " + std::to_string(base.domain().hi) + "]");
  }
}

struct DeformedLevel {
  QuadratureRule rule;
  std::vector<double> unnormalized;
  double Z = 0.0;
};

DeformedLevel deformed_level(const RealFn& f_tilde, double beta, QuadratureRule rule) {
  DeformedLevel level{std::move(rule), {}, 0.0};
  level.unnormalized.resize(level.rule.size());
  std::vector<double> terms(level.rule.size());
  for (std::size_t j = 0; j < level.rule.size(); ++j) {
    const double value = beta_exp(f_tilde(level.rule.nodes[j]), beta);
    if (!std::isfinite(value)) {
      throw NumericError("deformed exponential is not finite at t = " +
                         std::to_string(level.rule.nodes[j]));
    }
    level.unnormalized[j] = value;
    terms[j] = level.rule.weights[j] * value;
  }
  level.Z = pairwise_sum(terms);
  return level;
}

} // namespace

const char* family_name(Family family) noexcept {
  switch (family) {
  case Family::kernel_exp:
    return "kernel_exp";
  case Family::kernel_deformed:
    return "kernel_deformed";
  case Family::continuous_softmax:
    return "continuous_softmax";
  case Family::continuous_sparsemax:
    return "continuous_sparsemax";
  case Family::gaussian_mixture:
    return "gaussian_mixture";
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  for (Family f : {Family::kernel_exp, Family::kernel_deformed, Family::continuous_softmax,
                   Family::continuous_sparsemax, Family::gaussian_mixture}) {
    if (name == family_name(f)) {
      return f;
    }
  }
  throw ArgumentError("unknown density family '" + name + "'");
}

bool is_sparse_family(Family family) noexcept {
  return family == Family::kernel_deformed || family == Family::continuous_sparsemax;
}

double ContinuousSoftmaxDensity::pdf(double t) const noexcept {
  return std::exp(normal_logpdf(t, mu, sigma2));
}

void GaussianMixtureDensity::validate() const {
  if (weights.empty() || weights.size() != means.size() || weights.size() != variances.size()) {
    throw ArgumentError("mixture needs matching, non-empty weight, mean and variance arrays");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] >= 0.0) || !(variances[k] > 0.0) || !std::isfinite(means[k])) {
      throw ArgumentError("mixture weights must be >= 0, variances > 0 and means finite");
    }
    total += weights[k];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ArgumentError("mixture weights must sum to 1");
  }
}

AttentionDensity::AttentionDensity(Family family, ExpFamilyDensity body)
    : family_(family), body_(std::move(body)) {
  if (is_sparse_family(family)) {
    throw ArgumentError(std::string(family_name(family)) + " needs a deformed density body");
  }
}

AttentionDensity::AttentionDensity(Family family, DeformedDensity body)
    : family_(family), body_(std::move(body)) {
  if (!is_sparse_family(family)) {
    throw ArgumentError(std::string(family_name(family)) + " needs an exponential-family body");
  }
}

const QuadratureRule& AttentionDensity::rule() const noexcept {
  return std::visit([](const auto& b) -> const QuadratureRule& { return b.rule; }, body_);
}

const std::vector<double>& AttentionDensity::node_pdf() const noexcept {
  return std::visit([](const auto& b) -> const std::vector<double>& { return b.node_pdf; }, body_);
}

TailProfile tail_profile(const BaseDensity& base) {
  if (base.kind() == BaseDensity::Kind::gaussian) {
    return {2.0, 1.0 / (2.0 * base.sigma() * base.sigma()), 2.0};
  }
  // Compactly supported: the tail probability is zero beyond the domain.
  return {1.0, 1.0, std::numeric_limits<double>::infinity()};
}

ExpFamilyDensity normalize_exp_family(RealFn score, const QuadratureRule& rule,
                                      const NormalizeOptions& options) {
  QuadratureRule level = rule;
  double log_z = log_integrate_exp(score, level);
  if (options.adaptive) {
    while (true) {
      if (level.panel_count * 2 > options.max_panels) {
        throw NumericError("log-normalizer did not converge before the panel cap");
      }
      QuadratureRule finer = refine_rule(level, 2);
      const double log_z_fine = log_integrate_exp(score, finer);
      const bool done = std::abs(log_z_fine - log_z) <= options.rel_tol;
      level = std::move(finer);
      log_z = log_z_fine;
      if (done) {
        break;
      }
    }
  }
  if (!std::isfinite(log_z)) {
    throw NumericError("log-normalizer is not finite");
  }
  ExpFamilyDensity d;
  d.log_normalizer = log_z;
  d.node_pdf.resize(level.size());
  for (std::size_t j = 0; j < level.size(); ++j) {
    d.node_pdf[j] = std::exp(score(level.nodes[j]) - log_z);
  }
  d.score = std::move(score);
  d.rule = std::move(level);
  return d;
}

KernelExpDensity normalize_kexp(const RkhsFunction& f, const BaseDensity& base, const QuadratureRule& rule,
                                const NormalizeOptions& options) {
  if (!check_normalizable(f.kernel().growth(), tail_profile(base))) {
    throw ArgumentError("kernel growth is too fast for the tails of the base measure");
  }
  if (!(rule.base == base)) {
    throw ArgumentError("quadrature rule was built for a different base measure");
  }
  KernelExpDensity d = normalize_exp_family([f](double t) { return f(t); }, rule, options);
  d.rkhs = f;
  return d;
}

namespace {

// For alpha in (1.5, 2) the escort p_tilde^{2-alpha} behaves like (t - a)^g
// with 0 < g < 1 at an interior support boundary a, and uniform Gauss panels
// converge only algebraically there. Those ends get geometrically graded
// pieces. Ends on the domain edge are left alone.
std::vector<Interval> integration_pieces(const SupportSet& support, const Interval& domain,
                                         const AlphaParam& alpha) {
  constexpr int kLevels = 10;
  constexpr double kRatio = 0.2;
  constexpr double kOuterFraction = 0.25;
  const double a = alpha.alpha();
  if (!(a > 1.5 && a < 2.0)) {
    return support.intervals;
  }
  std::vector<Interval> pieces;
  for (const Interval& iv : support.intervals) {
    const bool grade_lo = iv.lo > domain.lo;
    const bool grade_hi = iv.hi < domain.hi;
    const double len = iv.length();
    std::vector<double> cuts{iv.lo};
    if (grade_lo) {
      for (int k = kLevels - 1; k >= 0; --k) {
        cuts.push_back(iv.lo + kOuterFraction * len * std::pow(kRatio, k));
      }
    }
    if (grade_hi) {
      for (int k = 0; k < kLevels; ++k) {
        cuts.push_back(iv.hi - kOuterFraction * len * std::pow(kRatio, k));
      }
    }
    cuts.push_back(iv.hi);
    for (std::size_t i = 1; i < cuts.size(); ++i) {
      if (cuts[i] > cuts[i - 1]) {
        pieces.push_back({cuts[i - 1], cuts[i]});
      }
    }
  }
  return pieces;
}

} // namespace

DeformedDensity normalize_deformed(RealFn f_tilde, const AlphaParam& alpha, const QuadratureRule& rule,
                                   const NormalizeOptions& options) {
  SupportSet support = find_support(f_tilde, alpha, rule);
  if (support.empty()) {
    throw DegenerateDensityError("deformed density has empty support");
  }
  const double beta = alpha.beta();
  const std::vector<Interval> pieces = integration_pieces(support, rule.domain, alpha);
  DeformedLevel level =
      deformed_level(f_tilde, beta, build_piecewise_rule(rule.base, pieces, rule.panel_count, rule.nodes_per_panel));
  if (options.adaptive) {
    while (true) {
      if (level.rule.panel_count * 2 > options.max_panels) {
        throw NumericError("deformed normalizer did not converge before the panel cap");
      }
      DeformedLevel finer = deformed_level(f_tilde, beta, refine_rule(level.rule, 2));
      const bool done = std::abs(finer.Z - level.Z) <= options.rel_tol * std::abs(finer.Z);
      level = std::move(finer);
      if (done) {
        break;
      }
    }
  }
  if (!std::isfinite(level.Z)) {
    throw NumericError("deformed normalizer is not finite");
  }
  if (level.Z < kMinNormalizer) {
    throw DegenerateDensityError("deformed normalizer vanishes");
  }
  DeformedDensity d;
  d.f_tilde = std::move(f_tilde);
  d.alpha = alpha;
  d.Z = level.Z;
  d.A_alpha = beta_log(level.Z, alpha.alpha());
  d.support = std::move(support);
  d.node_pdf.resize(level.unnormalized.size());
  for (std::size_t j = 0; j < d.node_pdf.size(); ++j) {
    d.node_pdf[j] = level.unnormalized[j] / level.Z;
  }
  d.node_unnormalized = std::move(level.unnormalized);
  d.rule = std::move(level.rule);
  return d;
}

KernelDeformedDensity normalize_kdeformed(const RkhsFunction& f_tilde, const AlphaParam& alpha,
                                          const BaseDensity& base, const QuadratureRule& rule,
                                          const NormalizeOptions& options) {
  if (!(rule.base == base)) {
    throw ArgumentError("quadrature rule was built for a different base measure");
  }
  KernelDeformedDensity d = normalize_deformed([f_tilde](double t) { return f_tilde(t); }, alpha, rule, options);
  d.rkhs = f_tilde;
  return d;
}

ContinuousSoftmaxDensity cts_softmax_from_theta(double theta1, double theta2) {
  if (!(theta2 < 0.0)) {
    throw ArgumentError("continuous softmax needs theta2 < 0; the density is not normalizable");
  }
  ContinuousSoftmaxDensity d;
  d.theta1 = theta1;
  d.theta2 = theta2;
  d.mu = -theta1 / (2.0 * theta2);
  d.sigma2 = -1.0 / (2.0 * theta2);
  return d;
}

AttentionDensity softmax_attention(const ContinuousSoftmaxDensity& shape, const QuadratureRule& rule,
                                   const NormalizeOptions& options) {
  const BaseDensity base = rule.base;
  const double mu = shape.mu;
  const double var = shape.sigma2;
  auto score = [base, mu, var](double t) { return normal_logpdf(t, mu, var) - std::log(base.q0(t)); };
  AttentionDensity d(Family::continuous_softmax, normalize_exp_family(score, rule, options));
  d.softmax_shape = shape;
  return d;
}

TruncatedParabolaDensity cts_sparsemax_from_moments(double mu, double sigma, const BaseDensity& base,
                                                    const QuadratureRule& rule,
                                                    const NormalizeOptions& options) {
  if (!(sigma > 0.0)) {
    throw ArgumentError("continuous sparsemax needs sigma > 0");
  }
  if (!(rule.base == base)) {
    throw ArgumentError("quadrature rule was built for a different base measure");
  }
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  auto f_tilde = [mu, inv_two_var](double t) { return -(t - mu) * (t - mu) * inv_two_var; };
  return normalize_deformed(f_tilde, AlphaParam(2.0), rule, options);
}

double gmm_pdf(const GaussianMixtureDensity& mixture, double t) {
  double acc = 0.0;
  for (std::size_t k = 0; k < mixture.size(); ++k) {
    acc += mixture.weights[k] * std::exp(normal_logpdf(t, mixture.means[k], mixture.variances[k]));
  }
  return acc;
}

AttentionDensity mixture_attention(const GaussianMixtureDensity& mixture, const QuadratureRule& rule,
                                   const NormalizeOptions& options) {
  mixture.validate();
  const BaseDensity base = rule.base;
  auto score = [mixture, base](double t) {
    // log-sum-exp over components keeps far tails finite.
    double shift = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(mixture.size());
    for (std::size_t k = 0; k < mixture.size(); ++k) {
      logs[k] = std::log(mixture.weights[k]) + normal_logpdf(t, mixture.means[k], mixture.variances[k]);
      shift = std::max(shift, logs[k]);
    }
    double acc = 0.0;
    for (double l : logs) {
      acc += std::exp(l - shift);
    }
    return shift + std::log(acc) - std::log(base.q0(t));
  };
  AttentionDensity d(Family::gaussian_mixture, normalize_exp_family(score, rule, options));
  d.mixture_shape = mixture;
  return d;
}

double density_eval(const ExpFamilyDensity& d, double t, Measure wrt) {
  check_in_domain(d.base(), t);
  const double p = std::exp(d.score(t) - d.log_normalizer);
  return wrt == Measure::q ? p : p * d.base().q0(t);
}

double density_eval(const DeformedDensity& d, double t, Measure wrt) {
  check_in_domain(d.base(), t);
  if (!d.support.contains(t)) {
    return 0.0;
  }
  const double p = beta_exp(d.f_tilde(t), d.alpha.beta()) / d.Z;
  return wrt == Measure::q ? p : p * d.base().q0(t);
}

double density_eval(const AttentionDensity& d, double t, Measure wrt) {
  if (const auto* exp_body = d.as_exp()) {
    return density_eval(*exp_body, t, wrt);
  }
  return density_eval(*d.as_deformed(), t, wrt);
}

double expectation(const AttentionDensity& d, const RealFn& g) {
  const QuadratureRule& rule = d.rule();
  const auto& pdf = d.node_pdf();
  std::vector<double> terms(rule.size());
  for (std::size_t j = 0; j < rule.size(); ++j) {
    terms[j] = rule.weights[j] * pdf[j] * g(rule.nodes[j]);
  }
  const double value = pairwise_sum(terms);
  if (!std::isfinite(value)) {
    throw NumericError("expectation is not finite");
  }
  return value;
}

double expectation(const AttentionDensity& d, const RealFn& g, const QuadratureRule& rule) {
  return weighted_sum([&](double t) { return density_eval(d, t, Measure::q) * g(t); }, rule);
}

QuadratureRule finer_rule(const AttentionDensity& d, int factor) { return refine_rule(d.rule(), factor); }

double verify_lemma1(std::span<const double> f_values, double Z, const AlphaParam& alpha) {
  if (!(Z > 0.0)) {
    throw ArgumentError("verify_lemma1 needs Z > 0");
  }
  const double a = alpha.alpha();
  const double beta = alpha.beta();
  const double scale = std::pow(Z, a - 1.0);
  const double log_z = beta_log(Z, a);
  double worst = 0.0;
  for (double f : f_values) {
    const double lhs = beta_exp(scale * f, beta) / Z;
    const double rhs = beta_exp(f - log_z, beta);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

} // namespace contatt
