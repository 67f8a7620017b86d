// contatt command line tool.
//   exit 0: success, 2: bad arguments or input, 3: numeric failure, 1: I/O or other errors

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "contatt/density_fit.hpp"
#include "contatt/errors.hpp"
#include "contatt/gmm_attention.hpp"
#include "contatt/gradcheck.hpp"
#include "contatt/pipeline/config.hpp"
#include "contatt/pipeline/csv.hpp"
#include "contatt/pipeline/export.hpp"
#include "contatt/pipeline/model.hpp"
#include "contatt/pipeline/synthetic.hpp"
#include "contatt/pipeline/train.hpp"
#include "contatt/rkhs.hpp"

namespace fs = std::filesystem;
using namespace contatt;
using namespace contatt::pipeline;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitArgs = 2;
constexpr int kExitNumeric = 3;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool out_required) {
  cmd->add_option("--config", args.config_path, "JSON run configuration");
  cmd->add_option("--seed", args.seed, "RNG seed (overrides the config)");
  auto* out = cmd->add_option("--out", args.out, "Output path");
  if (out_required) {
    out->required();
  }
}

RunConfig resolve_config(const CommonArgs& args) {
  RunConfig config = args.config_path.empty() ? RunConfig{} : load_config(args.config_path);
  if (args.seed) {
    config.seed = *args.seed;
  }
  config.validate();
  return config;
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create directory '" + dir + "': " + ec.message());
  }
}

int run_demo_data(const CommonArgs& args) {
  const RunConfig config = resolve_config(args);
  const SyntheticDataset data = generate_synthetic(config.seed, synthetic_options(config));
  const fs::path root(args.out);
  std::string labels = "split,file,label\n";
  auto dump = [&](const std::vector<LabeledSeries>& set, const std::string& split) {
    ensure_directory((root / split).string());
    for (std::size_t i = 0; i < set.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "seq_%05zu.csv", i);
      write_series_csv((root / split / name).string(), set[i].series);
      labels += split + ',' + split + '/' + name + ',' + std::to_string(set[i].label) + '\n';
    }
  };
  dump(data.train, "train");
  dump(data.test, "test");
  write_text_file((root / "labels.csv").string(), labels);
  std::cout << "wrote " << data.train.size() << " train and " << data.test.size() << " test series to " << args.out
            << "\n";
  return kExitOk;
}

int run_train(const CommonArgs& args) {
  const RunConfig config = resolve_config(args);
  const TrainResult result = train_demo(config);
  const fs::path root(args.out);
  ensure_directory(root.string());
  write_text_file((root / "model.json").string(), result.model.to_json());
  write_text_file((root / "metrics.json").string(), metrics_to_json(config, result.history));
  write_text_file((root / "config.json").string(), config_to_json(config));
  const EpochMetrics& last = result.history.back();
  std::cout << family_name(config.density_family) << " epochs=" << last.epoch << " test_accuracy=" << last.test_accuracy
            << " test_macro_f1=" << last.test_macro_f1 << "\n";
  return kExitOk;
}

struct FitArgs {
  std::string input;
  std::string method = "em";
  std::optional<int> components;
};

int run_fit_density(const CommonArgs& args, const FitArgs& fit) {
  const RunConfig config = resolve_config(args);
  json out;
  if (fit.method == "em") {
    const DiscreteAttention att = read_weights_csv(fit.input);
    EmOptions options;
    options.variance_floor = config.variance_floor;
    options.seed = config.seed;
    const EmFit result = weighted_em_fit(att, fit.components.value_or(config.mixture_components), options);
    out = {{"method", "em"},
           {"weights", result.mixture.weights},
           {"means", result.mixture.means},
           {"variances", result.mixture.variances},
           {"converged", result.converged},
           {"iterations", result.iterations},
           {"resets", result.resets},
           {"log_likelihood", result.log_likelihood.back()}};
  } else if (fit.method == "kernel") {
    // Target density w.r.t. Q given on a grid (t,p), linearly interpolated.
    const DiscreteAttention table = read_weights_csv(fit.input);
    const auto& ts = table.locations;
    const auto& ps = table.weights;
    for (std::size_t i = 1; i < ts.size(); ++i) {
      if (!(ts[i] > ts[i - 1])) {
        throw ArgumentError("target grid must be strictly increasing");
      }
    }
    auto target_shape = [&](double t) {
      if (t <= ts.front()) {
        return ps.front();
      }
      if (t >= ts.back()) {
        return ps.back();
      }
      const auto it = std::upper_bound(ts.begin(), ts.end(), t);
      const std::size_t j = static_cast<std::size_t>(it - ts.begin());
      const double a = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
      return (1.0 - a) * ps[j - 1] + a * ps[j];
    };
    // The table was normalized as weights; rescale it to a density under Q.
    const QuadratureRule rule = build_rule(config.base, 128, 8);
    const double mass = weighted_sum(target_shape, rule);
    if (!(mass > 0.0)) {
      throw DegenerateDensityError("target has zero mass under the base measure");
    }
    auto target = [&](double t) { return target_shape(t) / mass; };
    const auto points = default_inducing_points(config.base.domain(), config.inducing_points);
    const DeformedFit result = fit_kdeformed_l2(target, config.base, points,
                                                Kernel::gaussian_rbf(config.effective_bandwidth()),
                                                AlphaParam(config.alpha));
    json support = json::array();
    for (const auto& piece : result.density.support.intervals) {
      support.push_back({piece.lo, piece.hi});
    }
    out = {{"method", "kernel"},
           {"alpha", config.alpha},
           {"bandwidth", config.effective_bandwidth()},
           {"inducing_points", points},
           {"coefficients", result.coeffs},
           {"l2_error", result.l2_error},
           {"l1_error", result.l1_error},
           {"iterations", result.iterations},
           {"support", support}};
  } else {
    throw ArgumentError("unknown fit method '" + fit.method + "' (expected em or kernel)");
  }
  write_text_file(args.out, out.dump(2) + "\n");
  return kExitOk;
}

struct ExportArgs {
  std::string model;
  std::string input;
  int head = 0;
  int grid = 1000;
};

int run_export_density(const CommonArgs& args, const ExportArgs& ex) {
  DemoModel model = DemoModel::from_json(read_text_file(ex.model));
  const TimeSeries series = read_series_csv(ex.input);
  const PreparedSeries prepared = model.prepare(series);
  const DensityExport exported = export_density(model.head_density(prepared, ex.head), ex.grid);
  write_density_export(args.out, exported);
  return kExitOk;
}

struct GradcheckArgs {
  int features = 6;
  double tolerance = 1e-4;
};

int run_gradcheck(const CommonArgs& args, const GradcheckArgs& gc) {
  const RunConfig config = resolve_config(args);
  if (gc.features < 1) {
    throw ArgumentError("--features must be positive");
  }
  const AttentionConfig att = attention_config_for(config);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](Eigen::Index rows, Eigen::Index cols, double scale) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        m(r, c) = scale * normal(rng);
      }
    }
    return m;
  };
  std::vector<HeadParams> heads;
  for (int h = 0; h < config.heads; ++h) {
    heads.push_back({draw(att.raw_size(), gc.features, 0.5), draw(att.raw_size(), 1, 0.5).col(0)});
  }
  const BasisSet basis = BasisSet::uniform(config.base.domain(), config.basis);
  MultiHeadAttention layer(att, basis, heads);
  const Eigen::VectorXd v = draw(gc.features, 1, 1.0).col(0);
  const ValueParams value{draw(2, basis.size(), 1.0)};
  GradcheckOptions options;
  options.seed = config.seed;
  const GradcheckReport report = fd_gradcheck(layer, v, value, options);
  json out = {{"density_family", family_name(config.density_family)},
              {"max_rel_err", report.max_rel_err},
              {"location", report.location},
              {"checked", report.checked},
              {"skipped", report.skipped},
              {"tolerance", gc.tolerance},
              {"passed", report.max_rel_err <= gc.tolerance}};
  if (args.out.empty()) {
    std::cout << out.dump(2) << "\n";
  } else {
    write_text_file(args.out, out.dump(2) + "\n");
  }
  std::cout << "max relative error " << report.max_rel_err << " at " << report.location << " over " << report.checked
            << " probes\n";
  return report.max_rel_err <= gc.tolerance ? kExitOk : kExitNumeric;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous attention with kernel deformed exponential families"};
  app.require_subcommand(1);

  CommonArgs demo_args;
  auto* demo = app.add_subcommand("demo-data", "Write the synthetic classification dataset as CSV files");
  add_common(demo, demo_args, true);

  CommonArgs train_args;
  auto* train = app.add_subcommand("train", "Train the demo classifier and write model and metrics");
  add_common(train, train_args, true);

  CommonArgs fit_common;
  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit-density", "Fit a Gaussian mixture (em) or kernel deformed density (kernel)");
  add_common(fit, fit_common, true);
  fit->add_option("--input", fit_args.input, "CSV with columns t,w")->required();
  fit->add_option("--method", fit_args.method, "em or kernel")->check(CLI::IsMember({"em", "kernel"}));
  fit->add_option("--components", fit_args.components, "Mixture components for em");

  CommonArgs export_common;
  ExportArgs export_args;
  auto* exp = app.add_subcommand("export-density", "Evaluate one attention head of a trained model on a grid");
  add_common(exp, export_common, true);
  exp->add_option("--model", export_args.model, "model.json written by train")->required();
  exp->add_option("--input", export_args.input, "Series CSV")->required();
  exp->add_option("--head", export_args.head, "Head index");
  exp->add_option("--grid", export_args.grid, "Number of grid points");

  CommonArgs gc_common;
  GradcheckArgs gc_args;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the attention backward pass");
  add_common(gradcheck, gc_common, false);
  gradcheck->add_option("--features", gc_args.features, "Feature vector length");
  gradcheck->add_option("--tolerance", gc_args.tolerance, "Maximum accepted relative error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitArgs;
  }

  try {
    if (*demo) {
      return run_demo_data(demo_args);
    }
    if (*train) {
      return run_train(train_args);
    }
    if (*fit) {
      return run_fit_density(fit_common, fit_args);
    }
    if (*exp) {
      return run_export_density(export_common, export_args);
    }
    if (*gradcheck) {
      return run_gradcheck(gc_common, gc_args);
    }
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitArgs;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitArgs;
}
