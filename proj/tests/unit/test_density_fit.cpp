#include <cmath>

#include "doctest.h"

#include "contatt/density_fit.hpp"
#include "contatt/rkhs.hpp"

using namespace contatt;

TEST_SUITE("density_fit") {

TEST_CASE("fitting the base density keeps the zero score") {
  const BaseDensity base = BaseDensity::uniform(0.0, 1.0);
  const auto points = default_inducing_points(base.domain(), 4);
  DeformedFitOptions opts;
  opts.max_iters = 50;
  const DeformedFit fit =
      fit_kdeformed_l2([](double) { return 1.0; }, base, points, Kernel::gaussian_rbf(0.3), AlphaParam(2.0), opts);
  CHECK(fit.l1_error < 1e-12);
  for (double c : fit.coeffs) {
    CHECK(std::abs(c) < 1e-12);
  }
}

TEST_CASE("gradient descent reduces the error to a smooth target") {
  const BaseDensity base = BaseDensity::uniform(0.0, 1.0);
  auto target = [](double t) { return 1.0 + 0.5 * std::cos(2.0 * M_PI * t); };
  const auto points = default_inducing_points(base.domain(), 6);
  DeformedFitOptions short_run;
  short_run.max_iters = 1;
  DeformedFitOptions long_run;
  long_run.max_iters = 400;
  const Kernel k = Kernel::gaussian_rbf(0.2);
  const DeformedFit a = fit_kdeformed_l2(target, base, points, k, AlphaParam(2.0), short_run);
  const DeformedFit b = fit_kdeformed_l2(target, base, points, k, AlphaParam(2.0), long_run);
  CHECK(b.l2_error < a.l2_error);
  CHECK(b.l1_error < 0.05);
}

}
