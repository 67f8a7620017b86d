#pragma once

#include <cstdint>
#include <vector>

#include "contatt/value_function.hpp"

namespace contatt::pipeline {

struct LabeledSeries {
  TimeSeries series;
  int label = 0;
};

/// Toy task: 200 points on [0, 1] with Gaussian noise (sd 0.1) and a
/// raised-cosine bump whose location encodes the class. Class c carries an
/// amplitude-2 bump in window c and an amplitude-1 decoy in window (c+1) mod 3,
/// with windows [0.1, 0.2], [0.45, 0.55], [0.8, 0.9]. A random keep_fraction of
/// points survives, so the series are irregularly sampled.
struct SyntheticOptions {
  int classes = 3;
  int train_per_class = 100;
  int test_per_class = 50;
  double keep_fraction = 0.3;
};

struct SyntheticDataset {
  std::vector<LabeledSeries> train;
  std::vector<LabeledSeries> test;
  int classes = 0;
};

inline constexpr int kSyntheticGridPoints = 200;
inline constexpr double kSyntheticNoise = 0.1;
inline constexpr double kBumpHalfWidth = 0.04;

/// Window centers, one per class.
double class_window_center(int c);

/// Byte-identical output for equal seeds and options. Train and test are
/// class-balanced and interleaved (labels 0, 1, ..., C-1, 0, 1, ...).
SyntheticDataset generate_synthetic(std::uint64_t seed, const SyntheticOptions& options = {});

} // namespace contatt::pipeline
