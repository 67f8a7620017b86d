#include "contatt/pipeline/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"

#include "contatt/errors.hpp"
#include "contatt/rkhs.hpp"

namespace contatt::pipeline {

using nlohmann::json;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  // Fill row-major so the stream order is obvious and stable.
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = normal(rng);
    }
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(m(r, c));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back(v(i));
  }
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw ArgumentError("model file: matrix has the wrong number of rows");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ArgumentError("model file: matrix has the wrong number of columns");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& j, Eigen::Index size) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size) {
    throw ArgumentError("model file: vector has the wrong length");
  }
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
  }
  return v;
}

json layer_to_json(const DenseLayer& layer) {
  return {{"W", matrix_to_json(layer.W)}, {"b", vector_to_json(layer.b)}};
}

DenseLayer layer_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
  return {matrix_from_json(j.at("W"), rows, cols), vector_from_json(j.at("b"), rows)};
}

Eigen::Index encoder_input_size(const RunConfig& config, int dims) {
  return static_cast<Eigen::Index>(dims) * config.encoder_grid;
}

} // namespace

AttentionConfig attention_config_for(const RunConfig& config) {
  AttentionConfig a;
  a.family = config.density_family;
  a.alpha = config.density_family == Family::continuous_sparsemax ? 2.0 : config.alpha;
  a.base = config.base;
  a.inducing_points = default_inducing_points(config.base.domain(), config.inducing_points);
  a.bandwidth = config.effective_bandwidth();
  a.mixture_components = config.mixture_components;
  a.panels = config.quadrature_panels;
  a.nodes_per_panel = config.nodes_per_panel;
  a.validate();
  return a;
}

DemoModel DemoModel::initialize(const RunConfig& config, int dims) {
  config.validate();
  if (dims < 1) {
    throw ArgumentError("series must have at least one value channel");
  }
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  const Eigen::Index in = encoder_input_size(config, dims);
  const Eigen::Index hidden = config.encoder_hidden;
  DenseLayer encoder{random_matrix(hidden, in, std::sqrt(2.0 / static_cast<double>(in)), rng),
                     Eigen::VectorXd::Zero(hidden)};

  const AttentionConfig att = attention_config_for(config);
  const Eigen::Index raw = att.raw_size();
  std::vector<HeadParams> heads;
  for (int h = 0; h < config.heads; ++h) {
    heads.push_back({random_matrix(raw, hidden, 0.1 / std::sqrt(static_cast<double>(hidden)), rng),
                     Eigen::VectorXd::Zero(raw)});
  }
  const Eigen::Index context = static_cast<Eigen::Index>(config.heads) * dims;
  DenseLayer classifier{random_matrix(config.classes, context, 1.0 / std::sqrt(static_cast<double>(context)), rng),
                        Eigen::VectorXd::Zero(config.classes)};
  return DemoModel(config, dims, std::move(encoder), std::move(heads), std::move(classifier));
}

DemoModel::DemoModel(RunConfig config, int dims, DenseLayer encoder, std::vector<HeadParams> heads,
                     DenseLayer classifier)
    : config_(std::move(config)),
      dims_(dims),
      encoder_(std::move(encoder)),
      attention_(attention_config_for(config_), BasisSet::uniform(config_.base.domain(), config_.basis),
                 std::move(heads)),
      classifier_(std::move(classifier)) {
  const Eigen::Index in = encoder_input_size(config_, dims_);
  if (encoder_.W.rows() != config_.encoder_hidden || encoder_.W.cols() != in ||
      encoder_.b.size() != config_.encoder_hidden) {
    throw ArgumentError("encoder shape does not match the configuration");
  }
  if (attention_.head_count() != config_.heads) {
    throw ArgumentError("head count does not match the configuration");
  }
  if (classifier_.W.rows() != config_.classes || classifier_.W.cols() != config_.heads * dims_ ||
      classifier_.b.size() != config_.classes) {
    throw ArgumentError("classifier shape does not match the configuration");
  }
}

PreparedSeries DemoModel::prepare(const TimeSeries& series, int label) const {
  series.validate();
  if (series.dims() != dims_) {
    throw ArgumentError("series has " + std::to_string(series.dims()) + " channels, model expects " +
                        std::to_string(dims_));
  }
  PreparedSeries p;
  p.label = label;
  p.value = fit_ridge(series, basis(), config_.ridge_lambda);
  const Interval dom = config_.base.domain();
  const int g = config_.encoder_grid;
  p.x.resize(encoder_input_size(config_, dims_));
  for (int i = 0; i < g; ++i) {
    const double t = dom.lo + dom.length() * static_cast<double>(i) / (g - 1);
    const Eigen::VectorXd v = value_eval(p.value, basis(), t);
    for (int o = 0; o < dims_; ++o) {
      p.x(static_cast<Eigen::Index>(o) * g + i) = v(o);
    }
  }
  return p;
}

Eigen::VectorXd DemoModel::hidden_pre(const PreparedSeries& input) const {
  return encoder_.W * input.x + encoder_.b;
}

ContextVector DemoModel::context(const PreparedSeries& input) {
  const Eigen::VectorXd v = hidden_pre(input).cwiseMax(0.0);
  ContextVector c = attention_.forward(v, input.value);
  attention_.clear_cache();
  return c;
}

Eigen::VectorXd DemoModel::logits(const PreparedSeries& input) {
  return classifier_.W * context(input).c + classifier_.b;
}

int DemoModel::predict(const PreparedSeries& input) {
  Eigen::Index best = 0;
  logits(input).maxCoeff(&best);
  return static_cast<int>(best);
}

AttentionDensity DemoModel::head_density(const PreparedSeries& input, int h) const {
  if (h < 0 || h >= attention_.head_count()) {
    throw ArgumentError("head index out of range");
  }
  const Eigen::VectorXd v = hidden_pre(input).cwiseMax(0.0);
  return contatt::head_density(v, attention_.heads()[static_cast<std::size_t>(h)], attention_.config());
}

ModelGradients DemoModel::zero_gradients() const {
  ModelGradients g;
  g.encoder = {Eigen::MatrixXd::Zero(encoder_.W.rows(), encoder_.W.cols()), Eigen::VectorXd::Zero(encoder_.b.size())};
  for (const auto& h : attention_.heads()) {
    g.heads.push_back({Eigen::MatrixXd::Zero(h.W.rows(), h.W.cols()), Eigen::VectorXd::Zero(h.b.size())});
  }
  g.classifier = {Eigen::MatrixXd::Zero(classifier_.W.rows(), classifier_.W.cols()),
                  Eigen::VectorXd::Zero(classifier_.b.size())};
  return g;
}

double DemoModel::accumulate_gradients(const PreparedSeries& input, ModelGradients& grads, int& predicted) {
  if (input.label < 0 || input.label >= config_.classes) {
    throw ArgumentError("training series has an invalid label");
  }
  const Eigen::VectorXd pre = hidden_pre(input);
  const Eigen::VectorXd v = pre.cwiseMax(0.0);
  const ContextVector c = attention_.forward(v, input.value);
  const Eigen::VectorXd z = classifier_.W * c.c + classifier_.b;

  Eigen::Index best = 0;
  const double zmax = z.maxCoeff(&best);
  predicted = static_cast<int>(best);
  Eigen::VectorXd prob = (z.array() - zmax).exp();
  const double total = prob.sum();
  prob /= total;
  const double loss = -(z(input.label) - zmax - std::log(total));

  Eigen::VectorXd dz = prob;
  dz(input.label) -= 1.0;
  grads.classifier.W.noalias() += dz * c.c.transpose();
  grads.classifier.b += dz;
  const Eigen::VectorXd dc = classifier_.W.transpose() * dz;

  const GradientBundle ga = attention_.backward(dc);
  attention_.clear_cache();
  for (std::size_t h = 0; h < grads.heads.size(); ++h) {
    grads.heads[h].W += ga.d_W[h];
    grads.heads[h].b += ga.d_b[h];
  }
  const Eigen::VectorXd dpre = (pre.array() > 0.0).select(ga.d_v, 0.0);
  grads.encoder.W.noalias() += dpre * input.x.transpose();
  grads.encoder.b += dpre;
  return loss;
}

void DemoModel::apply(const ModelGradients& grads, double step) {
  encoder_.W -= step * grads.encoder.W;
  encoder_.b -= step * grads.encoder.b;
  auto& heads = attention_.mutable_heads();
  for (std::size_t h = 0; h < heads.size(); ++h) {
    heads[h].W -= step * grads.heads[h].W;
    heads[h].b -= step * grads.heads[h].b;
  }
  classifier_.W -= step * grads.classifier.W;
  classifier_.b -= step * grads.classifier.b;
}

std::string DemoModel::to_json() const {
  json heads = json::array();
  for (const auto& h : attention_.heads()) {
    heads.push_back({{"W", matrix_to_json(h.W)}, {"b", vector_to_json(h.b)}});
  }
  const AttentionConfig& att = attention_.config();
  json j = {
      {"format", "contatt-demo-model"},
      {"version", 1},
      {"config", json::parse(config_to_json(config_))},
      {"dims", dims_},
      {"inducing_points", att.inducing_points},
      {"bandwidth", att.bandwidth},
      {"basis", {{"centers", basis().centers()}, {"width", basis().width()}}},
      {"encoder", layer_to_json(encoder_)},
      {"heads", std::move(heads)},
      {"classifier", layer_to_json(classifier_)},
  };
  return j.dump(1);
}

DemoModel DemoModel::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ArgumentError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.value("format", std::string()) != "contatt-demo-model") {
      throw ArgumentError("not a contatt model file");
    }
    RunConfig config = parse_config(j.at("config").dump());
    const int dims = j.at("dims").get<int>();
    const AttentionConfig att = attention_config_for(config);
    const auto in = encoder_input_size(config, dims);
    DenseLayer encoder = layer_from_json(j.at("encoder"), config.encoder_hidden, in);
    std::vector<HeadParams> heads;
    for (const auto& h : j.at("heads")) {
      heads.push_back({matrix_from_json(h.at("W"), att.raw_size(), config.encoder_hidden),
                       vector_from_json(h.at("b"), att.raw_size())});
    }
    DenseLayer classifier = layer_from_json(j.at("classifier"), config.classes,
                                            static_cast<Eigen::Index>(config.heads) * dims);
    return DemoModel(std::move(config), dims, std::move(encoder), std::move(heads), std::move(classifier));
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("model file is malformed: ") + e.what());
  }
}

} // namespace contatt::pipeline
