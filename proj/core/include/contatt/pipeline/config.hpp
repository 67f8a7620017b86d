#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "contatt/base_density.hpp"
#include "contatt/densities.hpp"

namespace contatt::pipeline {

/// Every knob of a demo run. Parsing fills documented defaults for absent
/// keys and rejects unknown keys.
struct RunConfig {
  Family density_family = Family::kernel_deformed;
  double alpha = 2.0;
  int heads = 8;
  int inducing_points = 16;
  /// Unset: default_bandwidth(domain, inducing_points).
  std::optional<double> bandwidth;
  int basis = 32;
  double ridge_lambda = 1e-3;
  BaseDensity base = BaseDensity::uniform(0.0, 1.0);
  int quadrature_panels = 32;
  int nodes_per_panel = 8;
  double learning_rate = 1e-2;
  int epochs = 30;
  int batch_size = 32;
  std::uint64_t seed = 0;
  double variance_floor = 1e-6;
  int mixture_components = 2;
  int encoder_hidden = 64;
  int encoder_grid = 32;
  int classes = 3;
  int train_per_class = 100;
  int test_per_class = 50;
  double keep_fraction = 0.3;

  double effective_bandwidth() const;
  /// Throws ArgumentError on out-of-range values.
  void validate() const;
};

/// Parses a JSON object. Throws ArgumentError on malformed input or unknown keys.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::string& path);
std::string config_to_json(const RunConfig& config, int indent = 2);

} // namespace contatt::pipeline
