#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "contatt/base_density.hpp"
#include "contatt/deformed_math.hpp"
#include "contatt/quadrature.hpp"
#include "contatt/rkhs.hpp"

namespace contatt {

enum class Measure { q, lebesgue };

enum class Family {
  kernel_exp,
  kernel_deformed,
  continuous_softmax,
  continuous_sparsemax,
  gaussian_mixture,
};

const char* family_name(Family family) noexcept;
/// Inverse of family_name; throws ArgumentError for unknown names.
Family parse_family(const std::string& name);
bool is_sparse_family(Family family) noexcept;

struct NormalizeOptions {
  /// Double the panel count until the normalizer is stable to rel_tol.
  bool adaptive = true;
  double rel_tol = 1e-8;
  int max_panels = 1 << 14;
};

/// Treated as an empty support rather than a valid normalizer.
inline constexpr double kMinNormalizer = 1e-300;

/// Dense density p(t) = exp(f(t) - A) with respect to Q. node_pdf caches p at
/// the rule nodes.
struct ExpFamilyDensity {
  RealFn score;
  double log_normalizer = 0.0;
  QuadratureRule rule;
  std::vector<double> node_pdf;
  std::optional<RkhsFunction> rkhs;

  const BaseDensity& base() const noexcept { return rule.base; }
};

/// Sparse density p(t) = exp_{2-alpha}(f_tilde(t)) / Z with respect to Q.
/// Equivalently exp_{2-alpha}(f(t) - A_alpha) with f = f_tilde / Z^{alpha-1}
/// and A_alpha = log_alpha(Z). The rule covers only the support, split at its
/// boundaries.
struct DeformedDensity {
  RealFn f_tilde;
  AlphaParam alpha{2.0};
  double Z = 1.0;
  double A_alpha = 0.0;
  SupportSet support;
  QuadratureRule rule;
  std::vector<double> node_unnormalized;
  std::vector<double> node_pdf;
  std::optional<RkhsFunction> rkhs;

  const BaseDensity& base() const noexcept { return rule.base; }
};

using KernelExpDensity = ExpFamilyDensity;
using KernelDeformedDensity = DeformedDensity;
/// Continuous sparsemax: alpha = 2 with f_tilde(t) = -(t - mu)^2 / (2 sigma^2).
using TruncatedParabolaDensity = DeformedDensity;

/// Gaussian shape exp(theta1 t + theta2 t^2), theta2 < 0, i.e. N(mu, sigma2)
/// with respect to Lebesgue measure.
struct ContinuousSoftmaxDensity {
  double theta1 = 0.0;
  double theta2 = -0.5;
  double mu = 0.0;
  double sigma2 = 1.0;

  double pdf(double t) const noexcept;
};

struct GaussianMixtureDensity {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;

  std::size_t size() const noexcept { return weights.size(); }
  /// Throws ArgumentError unless shapes match, weights sum to one and variances are positive.
  void validate() const;
};

/// Tagged union over the five attention-density families.
class AttentionDensity {
public:
  AttentionDensity(Family family, ExpFamilyDensity body);
  AttentionDensity(Family family, DeformedDensity body);

  Family family() const noexcept { return family_; }
  bool is_sparse() const noexcept { return std::holds_alternative<DeformedDensity>(body_); }
  const QuadratureRule& rule() const noexcept;
  const BaseDensity& base() const noexcept { return rule().base; }
  const std::vector<double>& node_pdf() const noexcept;

  const ExpFamilyDensity* as_exp() const noexcept { return std::get_if<ExpFamilyDensity>(&body_); }
  const DeformedDensity* as_deformed() const noexcept { return std::get_if<DeformedDensity>(&body_); }

  /// Lebesgue shape parameters when built from a Gaussian or a mixture.
  std::optional<ContinuousSoftmaxDensity> softmax_shape;
  std::optional<GaussianMixtureDensity> mixture_shape;

private:
  Family family_;
  std::variant<ExpFamilyDensity, DeformedDensity> body_;
};

/// Tail profile of the base measure (Gaussian: eta = 2; uniform: compact).
TailProfile tail_profile(const BaseDensity& base);

ExpFamilyDensity normalize_exp_family(RealFn score, const QuadratureRule& rule,
                                      const NormalizeOptions& options = {});
KernelExpDensity normalize_kexp(const RkhsFunction& f, const BaseDensity& base,
                                const QuadratureRule& rule, const NormalizeOptions& options = {});

/// Throws DegenerateDensityError when the support is empty or Z < 1e-300 and
/// NumericError when Z is not finite.
DeformedDensity normalize_deformed(RealFn f_tilde, const AlphaParam& alpha, const QuadratureRule& rule,
                                   const NormalizeOptions& options = {});
KernelDeformedDensity normalize_kdeformed(const RkhsFunction& f_tilde, const AlphaParam& alpha,
                                          const BaseDensity& base, const QuadratureRule& rule,
                                          const NormalizeOptions& options = {});

/// Throws ArgumentError for theta2 >= 0.
ContinuousSoftmaxDensity cts_softmax_from_theta(double theta1, double theta2);

/// Gaussian N(mu, sigma2) restricted to the base domain and renormalized
/// against Q: score log N(t) - log q0(t).
AttentionDensity softmax_attention(const ContinuousSoftmaxDensity& shape, const QuadratureRule& rule,
                                   const NormalizeOptions& options = {});

TruncatedParabolaDensity cts_sparsemax_from_moments(double mu, double sigma, const BaseDensity& base,
                                                    const QuadratureRule& rule,
                                                    const NormalizeOptions& options = {});

/// Mixture restricted to the base domain and renormalized against Q.
AttentionDensity mixture_attention(const GaussianMixtureDensity& mixture, const QuadratureRule& rule,
                                   const NormalizeOptions& options = {});

double gmm_pdf(const GaussianMixtureDensity& mixture, double t);

/// Density value at t. Throws ArgumentError for t outside the base domain.
/// Sparse densities are exactly zero outside their support.
double density_eval(const ExpFamilyDensity& d, double t, Measure wrt = Measure::q);
double density_eval(const DeformedDensity& d, double t, Measure wrt = Measure::q);
double density_eval(const AttentionDensity& d, double t, Measure wrt = Measure::q);

/// E_p[g] on the density's own rule (cached node values).
double expectation(const AttentionDensity& d, const RealFn& g);
/// E_p[g] on an arbitrary rule over the same base (density re-evaluated at its nodes).
double expectation(const AttentionDensity& d, const RealFn& g, const QuadratureRule& rule);

/// A rule `factor` times finer than the density's own, with the same piece
/// structure (support-aware for sparse densities).
QuadratureRule finer_rule(const AttentionDensity& d, int factor);

/// max_j |(1/Z) exp_{2-a}(Z^{a-1} f_j) - exp_{2-a}(f_j - log_a Z)|.
double verify_lemma1(std::span<const double> f_values, double Z, const AlphaParam& alpha);

} // namespace contatt
