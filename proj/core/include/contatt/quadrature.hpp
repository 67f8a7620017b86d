#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "contatt/base_density.hpp"
#include "contatt/deformed_math.hpp"

namespace contatt {

using RealFn = std::function<double(double)>;

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendre gauss_legendre(int n);

/// Composite Gauss-Legendre rule against a base measure. Weights already
/// contain q0, so sum_j w_j f(t_j) approximates int f dQ over the pieces.
///
/// A rule covers one or more disjoint pieces of the base domain. The plain
/// rule has a single piece equal to the domain; support-aware rules split at
/// support boundaries and cover only the support.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  Interval domain;
  int panel_count = 0;
  int nodes_per_panel = 0;
  std::vector<Interval> pieces;
  std::vector<int> panels_per_piece;
  BaseDensity base = BaseDensity::uniform(0.0, 1.0);

  std::size_t size() const noexcept { return nodes.size(); }
  double total_mass() const;
};

QuadratureRule build_rule(const BaseDensity& base, int panels, int nodes_per_panel);

/// Rule restricted to `pieces` (sorted, disjoint, inside the base domain).
/// `panels` is distributed over the pieces in proportion to their length,
/// with at least one panel per piece.
QuadratureRule build_piecewise_rule(const BaseDensity& base, std::span<const Interval> pieces,
                                    int panels, int nodes_per_panel);

/// Same pieces with every piece's panel count multiplied by `factor`.
QuadratureRule refine_rule(const QuadratureRule& rule, int factor);

/// Fixed-order pairwise summation; identical inputs give identical bits.
double pairwise_sum(std::span<const double> terms);

/// sum_j w_j fn(t_j) on exactly this rule. Throws NumericError on a
/// non-finite integrand value.
double weighted_sum(const RealFn& fn, const QuadratureRule& rule);

/// log sum_j w_j exp(fn(t_j)), evaluated with a max shift so large exponents
/// do not overflow.
double log_integrate_exp(const RealFn& fn, const QuadratureRule& rule);

struct IntegrationOptions {
  double rel_tol = 1e-8;
  int max_panels = 1 << 14;
};

struct IntegrationResult {
  double value = 0.0;
  double err_estimate = 0.0;
  bool refinement_capped = false;
  int panels_used = 0;
};

/// Adaptive integration starting from `rule` as the coarsest level. Each
/// level doubles the panel count; err_estimate is the difference to the
/// previous (half resolution) level. Stops once err_estimate <= rel_tol*|value|
/// or the panel cap is hit, in which case refinement_capped is set.
IntegrationResult integrate(const RealFn& fn, const QuadratureRule& rule,
                            const IntegrationOptions& options = {});

/// Ordered, disjoint intervals where a deformed density is positive.
struct SupportSet {
  std::vector<Interval> intervals;

  bool empty() const noexcept { return intervals.empty(); }
  std::size_t size() const noexcept { return intervals.size(); }
  double measure() const noexcept;
  bool contains(double t) const noexcept;
};

/// Tolerance on support endpoints.
inline constexpr double kSupportTolerance = 1e-10;
/// Minimum number of uniformly spaced scan points used by find_support.
inline constexpr int kMinSupportScanPoints = 512;

/// Maximal intervals of rule.domain where 1 + (alpha - 1) f_tilde(t) > 0.
/// Sign changes are located on a scan grid (the rule nodes merged with at
/// least 512 uniform points) and refined by bisection. Islands narrower than
/// the scan spacing can be missed.
SupportSet find_support(const RealFn& f_tilde, const AlphaParam& alpha, const QuadratureRule& rule);

} // namespace contatt
