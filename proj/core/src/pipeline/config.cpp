#include "contatt/pipeline/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "contatt/errors.hpp"
#include "contatt/rkhs.hpp"

namespace contatt::pipeline {

using nlohmann::json;

namespace {

const std::set<std::string> kKnownKeys = {
    "density_family", "alpha",          "heads",          "inducing_points", "bandwidth",
    "basis",          "ridge_lambda",   "base",           "quadrature_panels", "nodes_per_panel",
    "learning_rate",  "epochs",         "batch_size",     "seed",            "variance_floor",
    "mixture_components", "encoder_hidden", "encoder_grid", "classes",       "train_per_class",
    "test_per_class", "keep_fraction",
};

json base_to_json(const BaseDensity& base) {
  if (base.kind() == BaseDensity::Kind::uniform) {
    return {{"kind", "uniform"}, {"lo", base.domain().lo}, {"hi", base.domain().hi}};
  }
  return {{"kind", "gaussian"}, {"mu", base.mu()}, {"sigma", base.sigma()}, {"truncation", base.truncation()}};
}

BaseDensity base_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform") {
    return BaseDensity::uniform(j.value("lo", 0.0), j.value("hi", 1.0));
  }
  if (kind == "gaussian") {
    return BaseDensity::gaussian(j.value("mu", 0.0), j.value("sigma", 1.0), j.value("truncation", 8.0));
  }
  throw ArgumentError("unknown base density kind '" + kind + "'");
}

template <typename T>
void read(const json& j, const char* key, T& slot) {
  if (j.contains(key)) {
    slot = j.at(key).get<T>();
  }
}

} // namespace

double RunConfig::effective_bandwidth() const {
  return bandwidth ? *bandwidth : default_bandwidth(base.domain(), inducing_points);
}

void RunConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) {
      throw ArgumentError(std::string("invalid config: ") + what);
    }
  };
  if (is_sparse_family(density_family)) {
    AlphaParam checked(density_family == Family::continuous_sparsemax ? 2.0 : alpha);
    (void)checked;
  }
  require(heads >= 1, "heads must be >= 1");
  require(inducing_points >= 1, "inducing_points must be >= 1");
  require(!bandwidth || *bandwidth > 0.0, "bandwidth must be positive");
  require(basis >= 1, "basis must be >= 1");
  require(ridge_lambda >= 0.0, "ridge_lambda must be >= 0");
  require(quadrature_panels >= 1, "quadrature_panels must be >= 1");
  require(nodes_per_panel >= 2, "nodes_per_panel must be >= 2");
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(epochs >= 0, "epochs must be >= 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(variance_floor > 0.0, "variance_floor must be positive");
  require(mixture_components >= 1, "mixture_components must be >= 1");
  require(encoder_hidden >= 1, "encoder_hidden must be >= 1");
  require(encoder_grid >= 2, "encoder_grid must be >= 2");
  require(classes >= 1 && classes <= 3, "classes must be in [1, 3]");
  require(train_per_class >= 1 && test_per_class >= 1, "per-class counts must be >= 1");
  require(keep_fraction > 0.0 && keep_fraction <= 1.0, "keep_fraction must lie in (0, 1]");
}

RunConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ArgumentError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw ArgumentError("config must be a JSON object");
  }
  for (const auto& item : j.items()) {
    if (!kKnownKeys.contains(item.key())) {
      throw ArgumentError("unknown config key '" + item.key() + "'");
    }
  }
  RunConfig c;
  try {
    if (j.contains("density_family")) {
      c.density_family = parse_family(j.at("density_family").get<std::string>());
    }
    read(j, "alpha", c.alpha);
    read(j, "heads", c.heads);
    read(j, "inducing_points", c.inducing_points);
    if (j.contains("bandwidth") && !j.at("bandwidth").is_null()) {
      c.bandwidth = j.at("bandwidth").get<double>();
    }
    read(j, "basis", c.basis);
    read(j, "ridge_lambda", c.ridge_lambda);
    if (j.contains("base")) {
      c.base = base_from_json(j.at("base"));
    }
    read(j, "quadrature_panels", c.quadrature_panels);
    read(j, "nodes_per_panel", c.nodes_per_panel);
    read(j, "learning_rate", c.learning_rate);
    read(j, "epochs", c.epochs);
    read(j, "batch_size", c.batch_size);
    read(j, "seed", c.seed);
    read(j, "variance_floor", c.variance_floor);
    read(j, "mixture_components", c.mixture_components);
    read(j, "encoder_hidden", c.encoder_hidden);
    read(j, "encoder_grid", c.encoder_grid);
    read(j, "classes", c.classes);
    read(j, "train_per_class", c.train_per_class);
    read(j, "test_per_class", c.test_per_class);
    read(j, "keep_fraction", c.keep_fraction);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("config has a value of the wrong type: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ArgumentError("cannot open config file '" + path + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string config_to_json(const RunConfig& c, int indent) {
  json j = {
      {"density_family", family_name(c.density_family)},
      {"alpha", c.alpha},
      {"heads", c.heads},
      {"inducing_points", c.inducing_points},
      {"bandwidth", c.bandwidth ? json(*c.bandwidth) : json(nullptr)},
      {"basis", c.basis},
      {"ridge_lambda", c.ridge_lambda},
      {"base", base_to_json(c.base)},
      {"quadrature_panels", c.quadrature_panels},
      {"nodes_per_panel", c.nodes_per_panel},
      {"learning_rate", c.learning_rate},
      {"epochs", c.epochs},
      {"batch_size", c.batch_size},
      {"seed", c.seed},
      {"variance_floor", c.variance_floor},
      {"mixture_components", c.mixture_components},
      {"encoder_hidden", c.encoder_hidden},
      {"encoder_grid", c.encoder_grid},
      {"classes", c.classes},
      {"train_per_class", c.train_per_class},
      {"test_per_class", c.test_per_class},
      {"keep_fraction", c.keep_fraction},
  };
  return j.dump(indent);
}

} // namespace contatt::pipeline
