#pragma once

#include <vector>

#include "contatt/densities.hpp"

namespace contatt {

struct DeformedFitOptions {
  int max_iters = 3000;
  double initial_step = 1.0;
  /// Stop when the relative loss decrease of an accepted step falls below this.
  double tol = 1e-12;
  /// Resolution of the fixed error grid.
  int grid_panels = 128;
  int grid_nodes_per_panel = 8;
  /// Resolution of the density's own normalizing rule.
  int density_panels = 64;
  int density_nodes_per_panel = 8;
};

struct DeformedFit {
  std::vector<double> coeffs;
  KernelDeformedDensity density;
  /// int (p - target)^2 dQ and int |p - target| dQ on the error grid.
  double l2_error = 0.0;
  double l1_error = 0.0;
  int iterations = 0;
};

/// Least-squares fit of a kernel deformed density to `target` (a density with
/// respect to Q) by gradient descent on the coefficients f_tilde, starting
/// from the uniform density. The step size grows after accepted steps and
/// halves after rejected ones.
DeformedFit fit_kdeformed_l2(const RealFn& target, const BaseDensity& base, std::vector<double> points,
                             const Kernel& kernel, const AlphaParam& alpha, const DeformedFitOptions& options = {});

} // namespace contatt
