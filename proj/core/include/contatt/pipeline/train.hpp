#pragma once

#include <string>
#include <vector>

#include "contatt/pipeline/config.hpp"
#include "contatt/pipeline/model.hpp"
#include "contatt/pipeline/synthetic.hpp"

namespace contatt::pipeline {

/// Epoch 0 holds the untrained model. Train metrics of later epochs are
/// accumulated during the epoch, before each batch update.
struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double train_macro_f1 = 0.0;
  double test_accuracy = 0.0;
  double test_macro_f1 = 0.0;
};

struct TrainResult {
  DemoModel model;
  std::vector<EpochMetrics> history;
};

/// Unweighted mean over classes of per-class F1 (a class with no true and
/// no predicted members contributes 0).
double macro_f1(const std::vector<int>& truth, const std::vector<int>& predicted, int classes);

SyntheticOptions synthetic_options(const RunConfig& config);

/// Mini-batch SGD on cross-entropy. Deterministic for a fixed config and data.
/// Throws NumericError naming the epoch if the loss becomes non-finite.
TrainResult train_demo(const RunConfig& config, const SyntheticDataset& data);
/// Generates the synthetic dataset from config.seed first.
TrainResult train_demo(const RunConfig& config);

std::string metrics_to_json(const RunConfig& config, const std::vector<EpochMetrics>& history);

} // namespace contatt::pipeline
