#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "contatt/densities.hpp"
#include "contatt/errors.hpp"
#include "contatt/rkhs.hpp"

using namespace contatt;

namespace {

const BaseDensity kUnit = BaseDensity::uniform(0.0, 1.0);

QuadratureRule unit_rule() { return build_rule(kUnit, 64, 8); }

double mass(const AttentionDensity& d, const QuadratureRule& rule) {
  return expectation(d, [](double) { return 1.0; }, rule);
}

// Composite Simpson on [a, b], independent of the library's quadrature.
template <typename F>
double simpson(F f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) {
    s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return s * h / 3.0;
}

} // namespace

TEST_SUITE("densities") {

TEST_CASE("family names round-trip") {
  for (Family f : {Family::kernel_exp, Family::kernel_deformed, Family::continuous_softmax,
                   Family::continuous_sparsemax, Family::gaussian_mixture}) {
    CHECK(parse_family(family_name(f)) == f);
  }
  CHECK(is_sparse_family(Family::kernel_deformed));
  CHECK(is_sparse_family(Family::continuous_sparsemax));
  CHECK_FALSE(is_sparse_family(Family::gaussian_mixture));
  CHECK_THROWS_AS(parse_family("softmax"), ArgumentError);
}

TEST_CASE("kernel exponential: zero and constant scores") {
  const auto points = default_inducing_points(kUnit.domain(), 5);
  const RkhsFunction zero({0, 0, 0, 0, 0}, points, Kernel::gaussian_rbf(0.1));
  const KernelExpDensity d = normalize_kexp(zero, kUnit, unit_rule());
  CHECK(d.log_normalizer == 0.0);
  for (double v : d.node_pdf) {
    CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(density_eval(d, 0.37, Measure::lebesgue) == doctest::Approx(1.0).epsilon(1e-14));

  const ExpFamilyDensity c = normalize_exp_family([](double) { return 2.5; }, unit_rule());
  CHECK(c.log_normalizer == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("exponential family with a linear score on a Gaussian base") {
  const BaseDensity g = BaseDensity::gaussian(0.0, 1.0);
  const ExpFamilyDensity d = normalize_exp_family([](double t) { return t; }, build_rule(g, 64, 8));
  CHECK(d.log_normalizer == doctest::Approx(0.5).epsilon(1e-10));
  // p w.r.t. Lebesgue is N(1, 1).
  for (double t : {-1.0, 0.0, 1.0, 2.5}) {
    const double n11 = std::exp(-0.5 * (t - 1.0) * (t - 1.0)) / std::sqrt(2.0 * std::numbers::pi);
    CHECK(density_eval(d, t, Measure::lebesgue) == doctest::Approx(n11).epsilon(1e-9));
    CHECK(density_eval(d, t) == doctest::Approx(std::exp(t - 0.5)).epsilon(1e-9));
  }
}

TEST_CASE("kernel deformed: zero score is the base density") {
  const auto points = default_inducing_points(kUnit.domain(), 4);
  for (double alpha : {1.1, 1.5, 2.0}) {
    const RkhsFunction zero({0, 0, 0, 0}, points, Kernel::gaussian_rbf(0.1));
    const KernelDeformedDensity d = normalize_kdeformed(zero, AlphaParam(alpha), kUnit, unit_rule());
    CHECK(d.Z == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(d.A_alpha) < 1e-14);
    CHECK(density_eval(d, 0.61) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("deformed parabola on Uniform(-2, 2)") {
  // exp_0(2 - t^2) = [3 - t^2]_+, Z = (1/4) int [3 - t^2]_+ dt = sqrt(3).
  const BaseDensity base = BaseDensity::uniform(-2.0, 2.0);
  const DeformedDensity d =
      normalize_deformed([](double t) { return 2.0 - t * t; }, AlphaParam(2.0), build_rule(base, 32, 8));
  const double root3 = std::sqrt(3.0);
  CHECK(d.Z == doctest::Approx(root3).epsilon(1e-12));
  CHECK(d.A_alpha == doctest::Approx(1.0 - 1.0 / root3).epsilon(1e-12));
  REQUIRE(d.support.size() == 1);
  CHECK(d.support.intervals[0].hi == doctest::Approx(root3).epsilon(1e-10));
  CHECK(density_eval(d, 1.9) == 0.0);
  CHECK(density_eval(d, -1.9) == 0.0);
  CHECK(density_eval(d, 0.0) == doctest::Approx(3.0 / root3).epsilon(1e-12));
  CHECK_THROWS_AS(density_eval(d, 2.5), ArgumentError);

  const AttentionDensity a(Family::kernel_deformed, d);
  CHECK(expectation(a, [](double t) { return t * t; }) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(std::abs(expectation(a, [](double t) { return t; })) < 1e-12);
  CHECK(expectation(a, [](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("deformed density with quadratic score matches the closed-form truncated parabola") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double mu = u(rng);
    const double s = 0.05 + 0.3 * u(rng);
    const TruncatedParabolaDensity d = cts_sparsemax_from_moments(mu, s, kUnit, unit_rule());
    // Closed form: p(t) = [1 - (t - mu)^2 / (2 s^2)]_+ / Z, Z = int over [0, 1] of the bracket.
    const double r = s * std::numbers::sqrt2;
    const double lo = std::max(0.0, mu - r);
    const double hi = std::min(1.0, mu + r);
    auto prim = [&](double t) { return t - (t - mu) * (t - mu) * (t - mu) / (6.0 * s * s); };
    const double Z = prim(hi) - prim(lo);
    CHECK(d.Z == doctest::Approx(Z).epsilon(1e-10));
    for (double t = 0.0; t <= 1.0; t += 0.01) {
      const double bracket = std::max(0.0, 1.0 - (t - mu) * (t - mu) / (2.0 * s * s));
      REQUIRE(std::abs(density_eval(d, t) - bracket / Z) < 1e-8);
    }
  }
}

TEST_CASE("continuous sparsemax support is centred on mu") {
  const TruncatedParabolaDensity d = cts_sparsemax_from_moments(0.5, 0.05, kUnit, unit_rule());
  REQUIRE(d.support.size() == 1);
  const Interval iv = d.support.intervals[0];
  CHECK(0.5 * (iv.lo + iv.hi) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(iv.length() < 1.0);
  CHECK(iv.hi - 0.5 == doctest::Approx(0.05 * std::numbers::sqrt2).epsilon(1e-9));
}

TEST_CASE("bimodal kernel deformed density has two disjoint support intervals") {
  const RkhsFunction f({5.0, 5.0}, {0.2, 0.8}, Kernel::gaussian_rbf(0.05));
  auto f_tilde = [&](double t) { return f(t) - 3.0; };
  const DeformedDensity d = normalize_deformed(f_tilde, AlphaParam(2.0), unit_rule());
  // Grid oracle: count runs of 1 + f_tilde > 0 on 10^4 points.
  int runs = 0;
  bool inside = false;
  for (int i = 0; i <= 10000; ++i) {
    const bool pos = 1.0 + f_tilde(i / 10000.0) > 0.0;
    runs += (pos && !inside) ? 1 : 0;
    inside = pos;
  }
  CHECK(runs == 2);
  REQUIRE(d.support.size() == 2);
  CHECK(d.support.intervals[0].hi < d.support.intervals[1].lo);
  for (int i = 0; i <= 10000; ++i) {
    const double t = i / 10000.0;
    if (!d.support.contains(t)) {
      REQUIRE(density_eval(d, t) == 0.0);
    }
  }
}

TEST_CASE("empty support is a degenerate density") {
  CHECK_THROWS_AS(normalize_deformed([](double) { return -2.0; }, AlphaParam(2.0), unit_rule()),
                  DegenerateDensityError);
}

TEST_CASE("continuous softmax parameters") {
  const ContinuousSoftmaxDensity a = cts_softmax_from_theta(0.0, -0.5);
  CHECK(a.mu == 0.0);
  CHECK(a.sigma2 == 1.0);
  const ContinuousSoftmaxDensity b = cts_softmax_from_theta(1.0, -0.5);
  CHECK(b.mu == 1.0);
  CHECK(b.sigma2 == 1.0);
  CHECK_THROWS_AS(cts_softmax_from_theta(0.0, 0.1), ArgumentError);
  CHECK_THROWS_AS(cts_softmax_from_theta(0.0, 0.0), ArgumentError);
}

TEST_CASE("Gaussian mixture pdf") {
  const GaussianMixtureDensity one{{1.0}, {0.3}, {0.04}};
  CHECK(gmm_pdf(one, 0.3) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi * 0.04)).epsilon(1e-14));
  const GaussianMixtureDensity two{{0.5, 0.5}, {-1.0, 1.0}, {0.01, 0.01}};
  CHECK(gmm_pdf(two, 0.0) < gmm_pdf(two, 1.0));
  CHECK(gmm_pdf(two, -1.0) == gmm_pdf(two, 1.0));
  CHECK_THROWS_AS((GaussianMixtureDensity{{0.6, 0.6}, {0, 1}, {1, 1}}.validate()), ArgumentError);
}

TEST_CASE("rescaling identity residual") {
  std::vector<double> f{-3.0, -1.0, 0.0, 0.5, 2.0};
  CHECK(verify_lemma1(f, 1.0, AlphaParam(1.5)) == 0.0);

  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> random(100);
  for (double& x : random) {
    x = u(rng);
  }
  CHECK(verify_lemma1(random, 2.7, AlphaParam(1.5)) < 1e-12);

  // alpha = 2, Z = 0.5, f = 4: left (1/Z)[1 + Z f]_+ = 6, right [1 + f - (1 - 1/Z)]_+ = 6.
  std::vector<double> four{4.0};
  CHECK(verify_lemma1(four, 0.5, AlphaParam(2.0)) < 1e-12);
  CHECK_THROWS_AS(verify_lemma1(four, 0.0, AlphaParam(2.0)), ArgumentError);
}

TEST_CASE("rescaled route and direct route agree pointwise") {
  std::mt19937_64 rng(53);
  std::normal_distribution<double> normal(0.0, 1.5);
  const auto points = default_inducing_points(kUnit.domain(), 6);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> gamma(points.size());
    for (double& g : gamma) {
      g = normal(rng);
    }
    const double alpha = 1.2 + 0.8 * (trial % 5) / 4.0;
    const AlphaParam a(alpha);
    const RkhsFunction f_tilde(gamma, points, Kernel::gaussian_rbf(0.15));
    const KernelDeformedDensity d = normalize_kdeformed(f_tilde, a, kUnit, unit_rule());
    const double scale = std::pow(d.Z, alpha - 1.0);
    for (double t = 0.0; t <= 1.0; t += 0.01) {
      const double direct = beta_exp(f_tilde(t) / scale - d.A_alpha, a.beta());
      REQUIRE(std::abs(density_eval(d, t) - direct) < 1e-10);
    }
  }
}

TEST_CASE("every family integrates to one and is discretization independent") {
  std::mt19937_64 rng(54);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto points = default_inducing_points(kUnit.domain(), 8);
  const Kernel k = Kernel::gaussian_rbf(0.1);
  NormalizeOptions opts;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> gamma(points.size());
    for (double& g : gamma) {
      g = 2.0 * normal(rng);
    }
    const RkhsFunction f(gamma, points, k);
    const QuadratureRule rule = unit_rule();
    std::vector<AttentionDensity> ds;
    ds.emplace_back(Family::kernel_exp, normalize_kexp(f, kUnit, rule, opts));
    ds.emplace_back(Family::kernel_deformed, normalize_kdeformed(f, AlphaParam(1.0 + u(rng)), kUnit, rule, opts));
    ds.push_back(softmax_attention(cts_softmax_from_theta(0.0, -0.5), rule, opts));
    ds.emplace_back(Family::continuous_sparsemax, cts_sparsemax_from_moments(u(rng), 0.02 + 0.3 * u(rng), kUnit, rule, opts));
    const double w = u(rng);
    ds.push_back(mixture_attention({{w, 1.0 - w}, {u(rng), u(rng)}, {0.01 + 0.05 * u(rng), 0.001 + 0.05 * u(rng)}},
                                   rule, opts));
    ds.push_back(softmax_attention(cts_softmax_from_theta(20.0 * u(rng), -10.0 - 40.0 * u(rng)), rule, opts));
    for (const auto& d : ds) {
      CHECK(std::abs(mass(d, d.rule()) - 1.0) < 1e-6);
      CHECK(std::abs(mass(d, finer_rule(d, 4)) - 1.0) < 1e-5);
    }
  }
}

TEST_CASE("dense families are strictly positive; sparse families vanish off support") {
  const auto points = default_inducing_points(kUnit.domain(), 8);
  const RkhsFunction f({-6, 3, -6, -6, -6, -6, 4, -6}, points, Kernel::gaussian_rbf(0.05));
  const QuadratureRule rule = unit_rule();
  const KernelExpDensity e = normalize_kexp(f, kUnit, rule);
  const AttentionDensity m = mixture_attention({{0.5, 0.5}, {0.1, 0.9}, {1e-2, 1e-2}}, rule);
  const KernelDeformedDensity s = normalize_kdeformed(f, AlphaParam(2.0), kUnit, rule);
  CHECK(s.support.size() >= 2);
  for (int i = 0; i <= 2000; ++i) {
    const double t = i / 2000.0;
    REQUIRE(density_eval(e, t) > 0.0);
    REQUIRE(density_eval(m, t) > 0.0);
    if (!s.support.contains(t)) {
      REQUIRE(density_eval(s, t) == 0.0);
    }
  }
}

TEST_CASE("softmax attention restricted to the base domain matches a direct integral") {
  const QuadratureRule rule = unit_rule();
  const AttentionDensity d = softmax_attention(cts_softmax_from_theta(0.3 / 0.04, -0.5 / 0.04), rule);
  auto gauss = [](double t) { return std::exp(-0.5 * (t - 0.3) * (t - 0.3) / 0.04); };
  const double z = simpson(gauss, 0.0, 1.0);
  const double mean = simpson([&](double t) { return t * gauss(t); }, 0.0, 1.0) / z;
  CHECK(expectation(d, [](double t) { return t; }) == doctest::Approx(mean).epsilon(1e-10));
  CHECK(density_eval(d, 0.5, Measure::lebesgue) == doctest::Approx(gauss(0.5) / z).epsilon(1e-10));
}

}
