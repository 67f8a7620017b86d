#include <cmath>
#include <random>

#include "doctest.h"

#include "contatt/gradcheck.hpp"
#include "contatt/rkhs.hpp"

using namespace contatt;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = normal(rng);
  }
  return m;
}

MultiHeadAttention random_layer(Family family, std::mt19937_64& rng, int features, int heads = 2) {
  AttentionConfig c;
  c.family = family;
  c.alpha = 1.5;
  c.inducing_points = default_inducing_points(c.base.domain(), 6);
  c.bandwidth = 0.15;
  c.panels = 16;
  std::vector<HeadParams> hs;
  for (int h = 0; h < heads; ++h) {
    hs.push_back({random_matrix(rng, c.raw_size(), features, 0.5), random_matrix(rng, c.raw_size(), 1, 0.5).col(0)});
  }
  return MultiHeadAttention(c, BasisSet::uniform(c.base.domain(), 8), hs);
}

} // namespace

TEST_SUITE("gradcheck") {

TEST_CASE("value-only probes are exact up to rounding") {
  std::mt19937_64 rng(91);
  MultiHeadAttention layer = random_layer(Family::kernel_exp, rng, 3);
  GradcheckOptions opts;
  opts.check_heads = false;
  opts.check_features = false;
  const GradcheckReport r =
      fd_gradcheck(layer, random_matrix(rng, 3, 1, 1.0).col(0), {random_matrix(rng, 2, 8, 1.0)}, opts);
  CHECK(r.checked == 16);
  CHECK(r.max_rel_err < 1e-8);
}

TEST_CASE("full chain gradients for every family") {
  std::mt19937_64 rng(92);
  for (Family f : {Family::kernel_exp, Family::kernel_deformed, Family::continuous_softmax,
                   Family::continuous_sparsemax, Family::gaussian_mixture}) {
    for (int trial = 0; trial < 3; ++trial) {
      MultiHeadAttention layer = random_layer(f, rng, 3);
      GradcheckOptions opts;
      opts.seed = static_cast<std::uint64_t>(trial);
      const GradcheckReport r =
          fd_gradcheck(layer, random_matrix(rng, 3, 1, 1.0).col(0), {random_matrix(rng, 2, 8, 1.0)}, opts);
      INFO(std::string(family_name(f)), " worst at ", r.location);
      CHECK(r.checked > 0);
      CHECK(r.max_rel_err < 1e-4);
    }
  }
}

TEST_CASE("a probe that moves the support onto the domain edge is skipped") {
  // Sparsemax head centred at 0.5 whose support ends exactly at 1.
  AttentionConfig c;
  c.family = Family::continuous_sparsemax;
  c.panels = 16;
  const double sigma = 0.5 / std::sqrt(2.0);
  const HeadParams head{Eigen::MatrixXd::Zero(2, 1), Eigen::Vector2d(0.0, std::log(std::expm1(sigma)))};
  MultiHeadAttention layer(c, BasisSet::uniform(c.base.domain(), 6), {head});
  std::mt19937_64 rng(93);
  GradcheckOptions opts;
  opts.check_value = false;
  opts.check_features = false;
  const GradcheckReport r = fd_gradcheck(layer, Eigen::VectorXd::Zero(1), {random_matrix(rng, 1, 6, 1.0)}, opts);
  bool skipped_scale = false;
  for (const auto& s : r.skipped) {
    skipped_scale = skipped_scale || s == "b[head 0](1)";
  }
  CHECK(skipped_scale);
  CHECK(r.max_rel_err < 1e-4);
}

}
