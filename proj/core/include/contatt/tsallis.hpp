#pragma once

#include <memory>
#include <vector>

#include "contatt/deformed_math.hpp"
#include "contatt/quadrature.hpp"

namespace contatt {

/// Density values p(t_j) with respect to Q at the nodes of a quadrature rule.
struct GridDensity {
  std::shared_ptr<const QuadratureRule> rule;
  std::vector<double> values;

  GridDensity(std::shared_ptr<const QuadratureRule> rule, std::vector<double> values);

  /// Samples `p` (density w.r.t. Q) at every node of `rule`.
  static GridDensity sample(std::shared_ptr<const QuadratureRule> rule, const RealFn& p);

  /// Quadrature mass sum_j w_j p_j.
  double mass() const;
  bool same_grid(const GridDensity& other) const;
};

/// Tsallis negentropy (1/(alpha(alpha-1))) (int p^alpha dQ - 1), or the
/// Shannon limit int p log p dQ for alpha == 1 (0 log 0 := 0). alpha must be
/// 1 or in (1, 2].
double tsallis_negentropy(const GridDensity& p, double alpha);
double tsallis_negentropy(const GridDensity& p, const AlphaParam& alpha);

/// Functional gradient t -> p(t)^{alpha-1} / (alpha-1) on the grid.
GridDensity negentropy_gradient(const GridDensity& p, const AlphaParam& alpha);

/// Omega(p) - Omega(g) - <grad Omega(g), p - g>. Throws ArgumentError when the
/// two densities live on different grids.
double bregman_divergence(const GridDensity& p, const GridDensity& g, const AlphaParam& alpha);

} // namespace contatt
