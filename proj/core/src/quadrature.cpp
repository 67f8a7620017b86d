#include "contatt/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "contatt/errors.hpp"

namespace contatt {
namespace {

QuadratureRule assemble(const BaseDensity& base, std::vector<Interval> pieces,
                        std::vector<int> per_piece, int nodes_per_panel) {
  const GaussLegendre gl = gauss_legendre(nodes_per_panel);
  QuadratureRule rule;
  rule.base = base;
  rule.domain = base.domain();
  rule.nodes_per_panel = nodes_per_panel;
  int total_panels = 0;
  for (std::size_t p = 0; p < pieces.size(); ++p) {
    const Interval piece = pieces[p];
    const int count = per_piece[p];
    const double width = piece.length() / count;
    for (int k = 0; k < count; ++k) {
      const double a = piece.lo + k * width;
      const double half = 0.5 * width;
      const double mid = a + half;
      for (int j = 0; j < nodes_per_panel; ++j) {
        const double t = mid + half * gl.nodes[j];
        rule.nodes.push_back(t);
        rule.weights.push_back(gl.weights[j] * half * base.q0(t));
      }
    }
    total_panels += count;
  }
  rule.panel_count = total_panels;
  rule.pieces = std::move(pieces);
  rule.panels_per_piece = std::move(per_piece);
  return rule;
}

} // namespace

GaussLegendre gauss_legendre(int n) {
  if (n < 1) {
    throw ArgumentError("Gauss-Legendre order must be >= 1");
  }
  GaussLegendre gl;
  if (n == 1) {
    gl.nodes = {0.0};
    gl.weights = {2.0};
    return gl;
  }
  gl.nodes.resize(n);
  gl.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Three-term recurrence for P_n(x) and P_{n-1}(x).
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) {
        break;
      }
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    gl.nodes[i] = -x;
    gl.nodes[n - 1 - i] = x;
    gl.weights[i] = w;
    gl.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) {
    gl.nodes[n / 2] = 0.0;
  }
  return gl;
}

double QuadratureRule::total_mass() const { return pairwise_sum(weights); }

QuadratureRule build_rule(const BaseDensity& base, int panels, int nodes_per_panel) {
  if (panels < 1 || nodes_per_panel < 2) {
    throw ArgumentError("build_rule needs panels >= 1 and nodes_per_panel >= 2");
  }
  const Interval domain = base.domain();
  if (!(domain.lo < domain.hi)) {
    throw ArgumentError("degenerate quadrature domain");
  }
  return assemble(base, {domain}, {panels}, nodes_per_panel);
}

QuadratureRule build_piecewise_rule(const BaseDensity& base, std::span<const Interval> pieces,
                                    int panels, int nodes_per_panel) {
  if (panels < 1 || nodes_per_panel < 2) {
    throw ArgumentError("build_piecewise_rule needs panels >= 1 and nodes_per_panel >= 2");
  }
  const Interval domain = base.domain();
  std::vector<Interval> kept;
  double total = 0.0;
  double prev_hi = -std::numeric_limits<double>::infinity();
  for (const Interval& piece : pieces) {
    if (piece.lo < prev_hi || piece.lo < domain.lo || piece.hi > domain.hi) {
      throw ArgumentError("quadrature pieces must be sorted, disjoint and inside the domain");
    }
    prev_hi = piece.hi;
    if (piece.hi > piece.lo) {
      kept.push_back(piece);
      total += piece.length();
    }
  }
  if (kept.empty()) {
    throw ArgumentError("degenerate quadrature domain: no piece of positive length");
  }
  std::vector<int> per_piece;
  per_piece.reserve(kept.size());
  for (const Interval& piece : kept) {
    const long share = std::lround(panels * piece.length() / total);
    per_piece.push_back(static_cast<int>(std::max(1L, share)));
  }
  return assemble(base, std::move(kept), std::move(per_piece), nodes_per_panel);
}

QuadratureRule refine_rule(const QuadratureRule& rule, int factor) {
  if (factor < 1) {
    throw ArgumentError("refinement factor must be >= 1");
  }
  std::vector<int> per_piece = rule.panels_per_piece;
  for (int& count : per_piece) {
    count *= factor;
  }
  return assemble(rule.base, rule.pieces, std::move(per_piece), rule.nodes_per_panel);
}

double pairwise_sum(std::span<const double> terms) {
  constexpr std::size_t kBlock = 16;
  if (terms.size() <= kBlock) {
    double acc = 0.0;
    for (double x : terms) {
      acc += x;
    }
    return acc;
  }
  const std::size_t half = terms.size() / 2;
  return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

double weighted_sum(const RealFn& fn, const QuadratureRule& rule) {
  std::vector<double> terms(rule.size());
  for (std::size_t j = 0; j < rule.size(); ++j) {
    const double value = fn(rule.nodes[j]);
    if (!std::isfinite(value)) {
      throw NumericError("integrand is not finite at t = " + std::to_string(rule.nodes[j]));
    }
    terms[j] = rule.weights[j] * value;
  }
  return pairwise_sum(terms);
}

double log_integrate_exp(const RealFn& fn, const QuadratureRule& rule) {
  std::vector<double> logs(rule.size());
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < rule.size(); ++j) {
    const double value = fn(rule.nodes[j]);
    if (std::isnan(value) || value == std::numeric_limits<double>::infinity()) {
      throw NumericError("log-integrand is not finite at t = " + std::to_string(rule.nodes[j]));
    }
    logs[j] = value + std::log(rule.weights[j]);
    shift = std::max(shift, logs[j]);
  }
  if (shift == -std::numeric_limits<double>::infinity()) {
    return shift;
  }
  std::vector<double> terms(rule.size());
  for (std::size_t j = 0; j < rule.size(); ++j) {
    terms[j] = std::exp(logs[j] - shift);
  }
  return shift + std::log(pairwise_sum(terms));
}

IntegrationResult integrate(const RealFn& fn, const QuadratureRule& rule,
                            const IntegrationOptions& options) {
  IntegrationResult result;
  double coarse = weighted_sum(fn, rule);
  QuadratureRule level = rule;
  while (true) {
    if (level.panel_count * 2 > options.max_panels) {
      result.refinement_capped = true;
      if (result.panels_used == 0) {
        result.value = coarse;
        result.err_estimate = std::numeric_limits<double>::infinity();
        result.panels_used = level.panel_count;
      }
      return result;
    }
    level = refine_rule(level, 2);
    const double fine = weighted_sum(fn, level);
    result.value = fine;
    result.err_estimate = std::abs(fine - coarse);
    result.panels_used = level.panel_count;
    if (result.err_estimate <= options.rel_tol * std::abs(fine) || result.err_estimate == 0.0) {
      return result;
    }
    coarse = fine;
  }
}

double SupportSet::measure() const noexcept {
  double total = 0.0;
  for (const Interval& iv : intervals) {
    total += iv.length();
  }
  return total;
}

bool SupportSet::contains(double t) const noexcept {
  return std::any_of(intervals.begin(), intervals.end(),
                     [t](const Interval& iv) { return iv.contains(t); });
}

SupportSet find_support(const RealFn& f_tilde, const AlphaParam& alpha, const QuadratureRule& rule) {
  const double a1 = alpha.alpha() - 1.0;
  auto gap = [&](double t) { return 1.0 + a1 * f_tilde(t); };

  const Interval domain = rule.domain;
  std::vector<double> scan = rule.nodes;
  const int uniform = std::max<int>(kMinSupportScanPoints, static_cast<int>(rule.size()));
  for (int i = 0; i <= uniform; ++i) {
    // lo + length can round past hi; pin the last point to the domain edge.
    scan.push_back(i == uniform ? domain.hi : std::min(domain.hi, domain.lo + domain.length() * i / uniform));
  }
  std::sort(scan.begin(), scan.end());
  scan.erase(std::unique(scan.begin(), scan.end()), scan.end());

  // Bisect a sign change between a non-positive point `out` and a positive
  // point `in`; returns the positive side so support covers every positive node.
  auto boundary = [&](double out, double in) {
    while (std::abs(in - out) > kSupportTolerance) {
      const double mid = 0.5 * (in + out);
      if (gap(mid) > 0.0) {
        in = mid;
      } else {
        out = mid;
      }
    }
    return in;
  };

  SupportSet support;
  bool inside = false;
  double start = 0.0;
  double prev_t = scan.front();
  for (std::size_t k = 0; k < scan.size(); ++k) {
    const double t = scan[k];
    const double g = gap(t);
    if (!std::isfinite(g)) {
      throw NumericError("support function is not finite at t = " + std::to_string(t));
    }
    const bool positive = g > 0.0;
    if (positive && !inside) {
      start = k == 0 ? t : boundary(prev_t, t);
      inside = true;
    } else if (!positive && inside) {
      support.intervals.push_back({start, boundary(t, prev_t)});
      inside = false;
    }
    prev_t = t;
  }
  if (inside) {
    support.intervals.push_back({start, scan.back()});
  }
  return support;
}

} // namespace contatt
