#include "contatt/pipeline/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "json.hpp"

#include "contatt/errors.hpp"

namespace contatt::pipeline {

namespace {

struct Evaluation {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double loss = 0.0;
};

Evaluation evaluate(DemoModel& model, const std::vector<PreparedSeries>& set, int classes) {
  std::vector<int> truth;
  std::vector<int> predicted;
  double loss = 0.0;
  int correct = 0;
  for (const auto& s : set) {
    const Eigen::VectorXd z = model.logits(s);
    Eigen::Index best = 0;
    const double zmax = z.maxCoeff(&best);
    loss += -(z(s.label) - zmax - std::log((z.array() - zmax).exp().sum()));
    truth.push_back(s.label);
    predicted.push_back(static_cast<int>(best));
    correct += static_cast<int>(best) == s.label ? 1 : 0;
  }
  const double n = static_cast<double>(set.size());
  return {correct / n, macro_f1(truth, predicted, classes), loss / n};
}

std::vector<PreparedSeries> prepare_all(const DemoModel& model, const std::vector<LabeledSeries>& set) {
  std::vector<PreparedSeries> out;
  out.reserve(set.size());
  for (const auto& s : set) {
    out.push_back(model.prepare(s.series, s.label));
  }
  return out;
}

// One shuffled pass of mini-batch SGD. Train metrics use the predictions made
// before each batch update.
EpochMetrics train_epoch(DemoModel& model, const std::vector<PreparedSeries>& train, const RunConfig& config,
                         std::mt19937_64& rng) {
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> truth;
  std::vector<int> predicted;
  double loss = 0.0;
  const auto batch = static_cast<std::size_t>(config.batch_size);
  for (std::size_t start = 0; start < order.size(); start += batch) {
    const std::size_t stop = std::min(order.size(), start + batch);
    ModelGradients grads = model.zero_gradients();
    for (std::size_t i = start; i < stop; ++i) {
      const auto& s = train[order[i]];
      int pred = 0;
      loss += model.accumulate_gradients(s, grads, pred);
      truth.push_back(s.label);
      predicted.push_back(pred);
    }
    if (!std::isfinite(loss)) {
      throw NumericError("loss is not finite");
    }
    model.apply(grads, config.learning_rate / static_cast<double>(stop - start));
  }
  EpochMetrics m;
  m.train_loss = loss / static_cast<double>(train.size());
  int correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    correct += truth[i] == predicted[i] ? 1 : 0;
  }
  m.train_accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  m.train_macro_f1 = macro_f1(truth, predicted, config.classes);
  return m;
}

} // namespace

double macro_f1(const std::vector<int>& truth, const std::vector<int>& predicted, int classes) {
  if (truth.size() != predicted.size()) {
    throw ArgumentError("truth and prediction lengths differ");
  }
  if (classes < 1) {
    throw ArgumentError("classes must be positive");
  }
  double total = 0.0;
  for (int c = 0; c < classes; ++c) {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool t = truth[i] == c;
      const bool p = predicted[i] == c;
      tp += (t && p) ? 1 : 0;
      fp += (!t && p) ? 1 : 0;
      fn += (t && !p) ? 1 : 0;
    }
    const int denom = 2 * tp + fp + fn;
    total += denom == 0 ? 0.0 : 2.0 * tp / denom;
  }
  return total / classes;
}

SyntheticOptions synthetic_options(const RunConfig& config) {
  return {config.classes, config.train_per_class, config.test_per_class, config.keep_fraction};
}

TrainResult train_demo(const RunConfig& config, const SyntheticDataset& data) {
  config.validate();
  if (data.train.empty() || data.test.empty()) {
    throw ArgumentError("training and test sets must be non-empty");
  }
  if (data.classes != config.classes) {
    throw ArgumentError("dataset class count differs from the configuration");
  }
  DemoModel model = DemoModel::initialize(config, data.train.front().series.dims());
  const auto train = prepare_all(model, data.train);
  const auto test = prepare_all(model, data.test);

  std::vector<EpochMetrics> history;
  {
    const Evaluation tr = evaluate(model, train, config.classes);
    const Evaluation te = evaluate(model, test, config.classes);
    history.push_back({0, tr.loss, tr.accuracy, tr.macro_f1, te.accuracy, te.macro_f1});
  }

  std::mt19937_64 rng(config.seed ^ 0xd1b54a32d192ed03ULL);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    try {
      EpochMetrics m = train_epoch(model, train, config, rng);
      m.epoch = epoch;
      const Evaluation te = evaluate(model, test, config.classes);
      m.test_accuracy = te.accuracy;
      m.test_macro_f1 = te.macro_f1;
      history.push_back(m);
    } catch (const NumericError& e) {
      throw NumericError("training failed in epoch " + std::to_string(epoch) + ": " + e.what());
    }
  }
  return {std::move(model), std::move(history)};
}

TrainResult train_demo(const RunConfig& config) {
  return train_demo(config, generate_synthetic(config.seed, synthetic_options(config)));
}

std::string metrics_to_json(const RunConfig& config, const std::vector<EpochMetrics>& history) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& m : history) {
    epochs.push_back({{"epoch", m.epoch},
                      {"train_loss", m.train_loss},
                      {"train_accuracy", m.train_accuracy},
                      {"train_macro_f1", m.train_macro_f1},
                      {"test_accuracy", m.test_accuracy},
                      {"test_macro_f1", m.test_macro_f1}});
  }
  nlohmann::json j = {
      {"density_family", family_name(config.density_family)},
      {"seed", config.seed},
      {"epochs", std::move(epochs)},
  };
  if (!history.empty()) {
    j["final_test_accuracy"] = history.back().test_accuracy;
    j["final_test_macro_f1"] = history.back().test_macro_f1;
  }
  return j.dump(2);
}

} // namespace contatt::pipeline
