#include "contatt/pipeline/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "contatt/errors.hpp"

namespace contatt::pipeline {

namespace {

double bump(double t, double center) {
  const double d = std::abs(t - center);
  if (d >= kBumpHalfWidth) {
    return 0.0;
  }
  return 0.5 * (1.0 + std::cos(std::numbers::pi * d / kBumpHalfWidth));
}

LabeledSeries make_series(int label, std::mt19937_64& rng, const SyntheticOptions& options) {
  std::normal_distribution<double> noise(0.0, kSyntheticNoise);
  std::uniform_real_distribution<double> keep(0.0, 1.0);
  const double main_center = class_window_center(label);
  const double decoy_center = class_window_center((label + 1) % 3);

  std::vector<double> times;
  std::vector<double> values;
  for (int i = 0; i < kSyntheticGridPoints; ++i) {
    const double t = static_cast<double>(i) / (kSyntheticGridPoints - 1);
    // Draw both variates for every grid point so the stream layout does not
    // depend on which points are kept.
    const double eps = noise(rng);
    const double u = keep(rng);
    if (u < options.keep_fraction) {
      times.push_back(t);
      values.push_back(2.0 * bump(t, main_center) + bump(t, decoy_center) + eps);
    }
  }
  if (times.size() < 2) {
    // Extremely small keep fractions: fall back to the two endpoints.
    times = {0.0, 1.0};
    values = {noise(rng), noise(rng)};
  }
  LabeledSeries out;
  out.label = label;
  out.series.times = std::move(times);
  out.series.values = Eigen::Map<Eigen::RowVectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return out;
}

} // namespace

double class_window_center(int c) {
  static constexpr double kCenters[3] = {0.15, 0.5, 0.85};
  if (c < 0 || c > 2) {
    throw ArgumentError("class index must be 0, 1 or 2");
  }
  return kCenters[c];
}

SyntheticDataset generate_synthetic(std::uint64_t seed, const SyntheticOptions& options) {
  if (options.classes < 1 || options.classes > 3) {
    throw ArgumentError("synthetic task supports 1 to 3 classes");
  }
  if (options.train_per_class < 1 || options.test_per_class < 1) {
    throw ArgumentError("per-class counts must be positive");
  }
  if (!(options.keep_fraction > 0.0 && options.keep_fraction <= 1.0)) {
    throw ArgumentError("keep_fraction must lie in (0, 1]");
  }
  std::mt19937_64 rng(seed);
  SyntheticDataset data;
  data.classes = options.classes;
  for (int i = 0; i < options.train_per_class; ++i) {
    for (int c = 0; c < options.classes; ++c) {
      data.train.push_back(make_series(c, rng, options));
    }
  }
  for (int i = 0; i < options.test_per_class; ++i) {
    for (int c = 0; c < options.classes; ++c) {
      data.test.push_back(make_series(c, rng, options));
    }
  }
  return data;
}

} // namespace contatt::pipeline
