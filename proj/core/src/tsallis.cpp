#include "contatt/tsallis.hpp"

#include <cmath>

#include "contatt/errors.hpp"

namespace contatt {

GridDensity::GridDensity(std::shared_ptr<const QuadratureRule> rule_in, std::vector<double> values_in)
    : rule(std::move(rule_in)), values(std::move(values_in)) {
  if (!rule) {
    throw ArgumentError("grid density needs a quadrature rule");
  }
  if (values.size() != rule->size()) {
    throw ArgumentError("grid density has " + std::to_string(values.size()) +
                        " values for a rule with " + std::to_string(rule->size()) + " nodes");
  }
}

GridDensity GridDensity::sample(std::shared_ptr<const QuadratureRule> rule, const RealFn& p) {
  std::vector<double> values;
  values.reserve(rule->size());
  for (double t : rule->nodes) {
    values.push_back(p(t));
  }
  return GridDensity(std::move(rule), std::move(values));
}

double GridDensity::mass() const {
  std::vector<double> terms(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    terms[j] = rule->weights[j] * values[j];
  }
  return pairwise_sum(terms);
}

bool GridDensity::same_grid(const GridDensity& other) const {
  return rule == other.rule ||
         (rule->nodes == other.rule->nodes && rule->weights == other.rule->weights);
}

double tsallis_negentropy(const GridDensity& p, double alpha) {
  const auto& w = p.rule->weights;
  std::vector<double> terms(p.values.size());
  if (alpha == 1.0) {
    for (std::size_t j = 0; j < terms.size(); ++j) {
      const double v = p.values[j];
      terms[j] = v > 0.0 ? w[j] * v * std::log(v) : 0.0;
    }
    return pairwise_sum(terms);
  }
  const AlphaParam checked(alpha);
  for (std::size_t j = 0; j < terms.size(); ++j) {
    terms[j] = w[j] * std::pow(p.values[j], checked.alpha());
  }
  return (pairwise_sum(terms) - 1.0) / (alpha * (alpha - 1.0));
}

double tsallis_negentropy(const GridDensity& p, const AlphaParam& alpha) {
  return tsallis_negentropy(p, alpha.alpha());
}

GridDensity negentropy_gradient(const GridDensity& p, const AlphaParam& alpha) {
  const double a1 = alpha.alpha() - 1.0;
  std::vector<double> grad(p.values.size());
  for (std::size_t j = 0; j < grad.size(); ++j) {
    const double v = p.values[j];
    grad[j] = v > 0.0 ? std::pow(v, a1) / a1 : 0.0;
  }
  return GridDensity(p.rule, std::move(grad));
}

double bregman_divergence(const GridDensity& p, const GridDensity& g, const AlphaParam& alpha) {
  if (!p.same_grid(g)) {
    throw ArgumentError("bregman_divergence needs both densities on the same grid");
  }
  // Pointwise form of Omega(p) - Omega(g) - <grad Omega(g), p - g>; each term
  // is non-negative by convexity of x^alpha.
  const double a = alpha.alpha();
  const auto& w = p.rule->weights;
  std::vector<double> terms(p.values.size());
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const double pv = p.values[j];
    const double gv = g.values[j];
    const double g_pow = gv > 0.0 ? std::pow(gv, a - 1.0) : 0.0;
    terms[j] = w[j] * (std::pow(pv, a) - g_pow * gv - a * g_pow * (pv - gv));
  }
  return pairwise_sum(terms) / (a * (a - 1.0));
}

} // namespace contatt
