#include <random>

#include <benchmark/benchmark.h>

#include "contatt/attention.hpp"
#include "contatt/densities.hpp"
#include "contatt/quadrature.hpp"
#include "contatt/rkhs.hpp"

using namespace contatt;

namespace {

std::vector<double> random_coeffs(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (double& x : out) {
    x = normal(rng);
  }
  return out;
}

void BM_BuildRule(benchmark::State& state) {
  const auto base = BaseDensity::gaussian(0.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_rule(base, static_cast<int>(state.range(0)), 8));
  }
}
BENCHMARK(BM_BuildRule)->Arg(32)->Arg(128);

void BM_NormalizeKernelExp(benchmark::State& state) {
  const int count = static_cast<int>(state.range(0));
  const auto base = BaseDensity::uniform(0.0, 1.0);
  const auto points = default_inducing_points(base.domain(), count);
  const RkhsFunction f(random_coeffs(count, 1), points, Kernel::gaussian_rbf(0.1));
  const QuadratureRule rule = build_rule(base, 64, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(normalize_kexp(f, base, rule));
  }
}
BENCHMARK(BM_NormalizeKernelExp)->Arg(8)->Arg(32);

void BM_NormalizeKernelDeformed(benchmark::State& state) {
  const int count = static_cast<int>(state.range(0));
  const auto base = BaseDensity::uniform(0.0, 1.0);
  const auto points = default_inducing_points(base.domain(), count);
  const RkhsFunction f(random_coeffs(count, 2), points, Kernel::gaussian_rbf(0.1));
  const QuadratureRule rule = build_rule(base, 64, 8);
  const AlphaParam alpha(1.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(normalize_kdeformed(f, alpha, base, rule));
  }
}
BENCHMARK(BM_NormalizeKernelDeformed)->Arg(8)->Arg(32);

void BM_AttentionForwardBackward(benchmark::State& state) {
  AttentionConfig config;
  config.family = static_cast<Family>(state.range(0));
  config.alpha = 1.5;
  config.inducing_points = default_inducing_points(config.base.domain(), 16);
  config.panels = 32;
  const BasisSet basis = BasisSet::uniform(config.base.domain(), 32);
  const int features = 64;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 0.1);
  std::vector<HeadParams> heads;
  for (int h = 0; h < 8; ++h) {
    HeadParams p{Eigen::MatrixXd(config.raw_size(), features), Eigen::VectorXd::Zero(config.raw_size())};
    for (Eigen::Index i = 0; i < p.W.size(); ++i) {
      p.W.data()[i] = normal(rng);
    }
    heads.push_back(std::move(p));
  }
  MultiHeadAttention layer(config, basis, heads);
  Eigen::VectorXd v(features);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = std::abs(normal(rng)) * 10.0;
  }
  ValueParams value{Eigen::MatrixXd::Ones(1, basis.size())};
  const Eigen::VectorXd upstream = Eigen::VectorXd::Ones(8);
  for (auto _ : state) {
    layer.forward(v, value);
    benchmark::DoNotOptimize(layer.backward(upstream));
  }
}
BENCHMARK(BM_AttentionForwardBackward)
    ->Arg(static_cast<int>(Family::kernel_exp))
    ->Arg(static_cast<int>(Family::kernel_deformed))
    ->Arg(static_cast<int>(Family::continuous_softmax))
    ->Arg(static_cast<int>(Family::continuous_sparsemax))
    ->Arg(static_cast<int>(Family::gaussian_mixture));

} // namespace

BENCHMARK_MAIN();
