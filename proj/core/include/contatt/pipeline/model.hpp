#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "contatt/attention.hpp"
#include "contatt/pipeline/config.hpp"
#include "contatt/value_function.hpp"

namespace contatt::pipeline {

struct DenseLayer {
  Eigen::MatrixXd W;
  Eigen::VectorXd b;
};

/// Per-series inputs that do not depend on trainable parameters: the ridge
/// value function and the encoder input (V sampled on a fixed grid).
struct PreparedSeries {
  ValueParams value;
  Eigen::VectorXd x;
  int label = -1;
};

struct ModelGradients {
  DenseLayer encoder;
  std::vector<HeadParams> heads;
  DenseLayer classifier;
};

/// Classifier used by the demo: encoder ReLU(W x + b) over V on a grid, a
/// multi-head continuous attention layer, and a linear-softmax read-out of
/// the concatenated context.
class DemoModel {
public:
  /// Seeded random initialization for series with `dims` value channels.
  static DemoModel initialize(const RunConfig& config, int dims);

  DemoModel(RunConfig config, int dims, DenseLayer encoder, std::vector<HeadParams> heads, DenseLayer classifier);

  const RunConfig& config() const noexcept { return config_; }
  const AttentionConfig& attention_config() const noexcept { return attention_.config(); }
  const BasisSet& basis() const noexcept { return attention_.basis(); }
  int dims() const noexcept { return dims_; }
  const DenseLayer& encoder() const noexcept { return encoder_; }
  const DenseLayer& classifier() const noexcept { return classifier_; }
  const std::vector<HeadParams>& heads() const noexcept { return attention_.heads(); }

  PreparedSeries prepare(const TimeSeries& series, int label = -1) const;

  ContextVector context(const PreparedSeries& input);
  Eigen::VectorXd logits(const PreparedSeries& input);
  int predict(const PreparedSeries& input);
  /// Density of head `h` for one series.
  AttentionDensity head_density(const PreparedSeries& input, int h) const;

  /// Zero-valued gradient buffers shaped like the parameters.
  ModelGradients zero_gradients() const;
  /// Cross-entropy loss for one labelled series; adds its gradient to `grads`.
  /// `predicted` receives the arg-max class of the forward pass.
  double accumulate_gradients(const PreparedSeries& input, ModelGradients& grads, int& predicted);
  /// params -= step * grads
  void apply(const ModelGradients& grads, double step);

  std::string to_json() const;
  static DemoModel from_json(const std::string& text);

private:
  Eigen::VectorXd hidden_pre(const PreparedSeries& input) const;

  RunConfig config_;
  int dims_;
  DenseLayer encoder_;
  MultiHeadAttention attention_;
  DenseLayer classifier_;
};

AttentionConfig attention_config_for(const RunConfig& config);

} // namespace contatt::pipeline
