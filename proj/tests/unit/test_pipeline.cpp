#include <cmath>
#include <filesystem>
#include <sstream>

#include "doctest.h"

#include "contatt/errors.hpp"
#include "contatt/pipeline/config.hpp"
#include "contatt/pipeline/csv.hpp"
#include "contatt/pipeline/export.hpp"
#include "contatt/pipeline/model.hpp"
#include "contatt/pipeline/synthetic.hpp"
#include "contatt/pipeline/train.hpp"

using namespace contatt;
using namespace contatt::pipeline;

namespace {

std::string dataset_text(const SyntheticDataset& d) {
  std::string out;
  for (const auto* set : {&d.train, &d.test}) {
    for (const auto& s : *set) {
      out += std::to_string(s.label) + "\n" + series_to_csv(s.series);
    }
  }
  return out;
}

RunConfig small_config(Family family) {
  RunConfig c;
  c.density_family = family;
  c.heads = 2;
  c.inducing_points = 6;
  c.bandwidth = 0.1;
  c.basis = 12;
  c.encoder_hidden = 8;
  c.encoder_grid = 8;
  c.quadrature_panels = 16;
  c.train_per_class = 6;
  c.test_per_class = 4;
  c.batch_size = 4;
  c.epochs = 2;
  c.learning_rate = 0.5;
  c.seed = 3;
  return c;
}

int data_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) {
    ++rows;
  }
  return rows;
}

std::vector<std::array<double, 3>> parse_export(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<std::array<double, 3>> rows;
  while (std::getline(in, line)) {
    std::array<double, 3> r{};
    std::sscanf(line.c_str(), "%lf,%lf,%lf", &r[0], &r[1], &r[2]);
    rows.push_back(r);
  }
  return rows;
}

} // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config defaults and validation") {
  const RunConfig c = parse_config("{}");
  CHECK(c.density_family == Family::kernel_deformed);
  CHECK(c.alpha == 2.0);
  CHECK(c.heads == 8);
  CHECK(c.inducing_points == 16);
  CHECK(c.basis == 32);
  CHECK(c.learning_rate == 0.01);
  CHECK(c.epochs == 30);
  CHECK(c.batch_size == 32);
  CHECK(c.variance_floor == 1e-6);
  CHECK(c.effective_bandwidth() == doctest::Approx(1.0 / 160.0).epsilon(1e-15));
  CHECK(c.base == BaseDensity::uniform(0.0, 1.0));

  CHECK_THROWS_AS(parse_config(R"({"heds": 3})"), ArgumentError);
  CHECK_THROWS_AS(parse_config(R"({"heads": "three"})"), ArgumentError);
  CHECK_THROWS_AS(parse_config(R"({"alpha": 2.5})"), ArgumentError);
  CHECK_THROWS_AS(parse_config(R"({"keep_fraction": 0})"), ArgumentError);
  CHECK_THROWS_AS(parse_config(R"({"density_family": "softmax"})"), ArgumentError);
  CHECK_THROWS_AS(parse_config("[1, 2]"), ArgumentError);
  CHECK_THROWS_AS(parse_config("{"), ArgumentError);
}

TEST_CASE("config JSON round-trips") {
  RunConfig c = small_config(Family::gaussian_mixture);
  c.base = BaseDensity::gaussian(0.5, 0.2, 6.0);
  c.alpha = 1.25;
  const RunConfig back = parse_config(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(back.base == c.base);
  CHECK(back.bandwidth == c.bandwidth);
}

TEST_CASE("series CSV round-trips") {
  TimeSeries s{{0.0, 0.125, 0.7}, Eigen::MatrixXd(2, 3)};
  s.values << 0.1, -2.5, 1e-17, 3.0, 0.3333333333333333, -0.0;
  const std::string text = series_to_csv(s);
  CHECK(text.rfind("time,dim_0,dim_1\n", 0) == 0);
  const TimeSeries back = series_from_csv(text);
  CHECK(back.times == s.times);
  CHECK(back.values == s.values);
  CHECK_THROWS_AS(series_from_csv("time,dim_0\n0.1,abc\n"), ArgumentError);
  CHECK_THROWS_AS(series_from_csv("time,dim_0\n0.5,1\n0.1,2\n"), ArgumentError);
}

TEST_CASE("synthetic data is deterministic and shaped as documented") {
  const SyntheticDataset a = generate_synthetic(7, {3, 5, 2, 0.3});
  const SyntheticDataset b = generate_synthetic(7, {3, 5, 2, 0.3});
  const SyntheticDataset c = generate_synthetic(8, {3, 5, 2, 0.3});
  CHECK(dataset_text(a) == dataset_text(b));
  CHECK(dataset_text(a) != dataset_text(c));
  CHECK(a.train.size() == 15);
  CHECK(a.test.size() == 6);
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    CHECK(a.train[i].label == static_cast<int>(i % 3));
  }
  const SyntheticDataset full = generate_synthetic(1, {3, 2, 1, 1.0});
  for (const auto& s : full.train) {
    CHECK(s.series.length() == 200);
  }
  CHECK_THROWS_AS(generate_synthetic(1, {3, 2, 1, 0.0}), ArgumentError);
  CHECK_THROWS_AS(generate_synthetic(1, {3, 2, 1, 1.5}), ArgumentError);
  CHECK_THROWS_AS(generate_synthetic(1, {4, 2, 1, 0.3}), ArgumentError);
}

TEST_CASE("class-0 mean signal is noise level outside its windows") {
  const SyntheticDataset d = generate_synthetic(11, {1, 500, 1, 1.0});
  std::vector<double> mean(200, 0.0);
  for (const auto& s : d.train) {
    for (int l = 0; l < 200; ++l) {
      mean[static_cast<std::size_t>(l)] += s.series.values(0, l) / 500.0;
    }
  }
  for (int l = 0; l < 200; ++l) {
    const double t = l / 199.0;
    const bool in_window = std::abs(t - 0.15) < 0.04 || std::abs(t - 0.5) < 0.04;
    if (t >= 0.45 && t <= 0.9 && !in_window) {
      CHECK(std::abs(mean[static_cast<std::size_t>(l)]) < 0.15);
    }
  }
  // The decoy bump of class 0 sits in window 1 at half amplitude.
  CHECK(mean[static_cast<std::size_t>(std::lround(0.5 * 199))] > 0.8);
}

TEST_CASE("macro F1") {
  CHECK(macro_f1({0, 1, 2}, {0, 1, 2}, 3) == 1.0);
  // class 0: tp 1 fp 1 fn 0 -> 2/3; class 1: tp 0 fp 0 fn 1 -> 0; class 2: 1.
  CHECK(macro_f1({0, 1, 2}, {0, 0, 2}, 3) == doctest::Approx((2.0 / 3.0 + 0.0 + 1.0) / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(macro_f1({0}, {0, 1}, 2), ArgumentError);
}

TEST_CASE("an untrained model predicts at chance level") {
  RunConfig c = small_config(Family::kernel_exp);
  c.epochs = 0;
  c.test_per_class = 50;
  const TrainResult r = train_demo(c);
  REQUIRE(r.history.size() == 1);
  // 99% binomial interval around 1/3 for 150 test sequences.
  CHECK(std::abs(r.history[0].test_accuracy - 1.0 / 3.0) < 2.58 * std::sqrt(2.0 / 9.0 / 150.0));
}

TEST_CASE("training is bit-reproducible and reports every epoch") {
  const RunConfig c = small_config(Family::kernel_deformed);
  const TrainResult a = train_demo(c);
  const TrainResult b = train_demo(c);
  CHECK(a.history.size() == 3);
  CHECK(metrics_to_json(c, a.history) == metrics_to_json(c, b.history));
  CHECK(a.model.to_json() == b.model.to_json());
}

TEST_CASE("divergent training names the epoch") {
  RunConfig c = small_config(Family::kernel_exp);
  c.learning_rate = 1e300;
  c.epochs = 3;
  try {
    train_demo(c);
    FAIL("expected a numeric error");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("model save and load reproduce contexts") {
  for (Family f : {Family::kernel_exp, Family::kernel_deformed, Family::continuous_softmax,
                   Family::continuous_sparsemax, Family::gaussian_mixture}) {
    RunConfig c = small_config(f);
    c.epochs = 1;
    TrainResult r = train_demo(c);
    DemoModel loaded = DemoModel::from_json(r.model.to_json());
    const SyntheticDataset d = generate_synthetic(99, {3, 1, 1, 0.3});
    for (const auto& s : d.test) {
      const Eigen::VectorXd a = r.model.context(r.model.prepare(s.series)).c;
      const Eigen::VectorXd b = loaded.context(loaded.prepare(s.series)).c;
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
  CHECK_THROWS_AS(DemoModel::from_json("{}"), ArgumentError);
  CHECK_THROWS_AS(DemoModel::from_json("not json"), ArgumentError);
}

TEST_CASE("density export format and content") {
  const SyntheticDataset d = generate_synthetic(5, {3, 1, 1, 0.3});
  RunConfig c = small_config(Family::kernel_exp);
  DemoModel m = DemoModel::initialize(c, 1);
  // Zero heads give the base density.
  DemoModel zero(c, 1, m.encoder(),
                 std::vector<HeadParams>(2, {Eigen::MatrixXd::Zero(6, c.encoder_hidden), Eigen::VectorXd::Zero(6)}),
                 m.classifier());
  const DensityExport flat = export_density(zero.head_density(zero.prepare(d.test[0].series), 0), 1000);
  CHECK(flat.csv.rfind("t,pdf_q,pdf_lebesgue\n", 0) == 0);
  CHECK(data_rows(flat.csv) == 1000);
  CHECK_FALSE(flat.support.has_value());
  for (const auto& r : parse_export(flat.csv)) {
    REQUIRE(r[1] == doctest::Approx(1.0).epsilon(1e-12));
  }

  // A trained sparse head: zero outside the listed support, unit mass.
  RunConfig sc = small_config(Family::kernel_deformed);
  sc.epochs = 2;
  TrainResult trained = train_demo(sc);
  for (int h = 0; h < sc.heads; ++h) {
    const AttentionDensity dens = trained.model.head_density(trained.model.prepare(d.test[1].series), h);
    const DensityExport ex = export_density(dens, 1000);
    REQUIRE(ex.support.has_value());
    const auto rows = parse_export(ex.csv);
    double mass = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!dens.as_deformed()->support.contains(rows[i][0])) {
        REQUIRE(rows[i][1] == 0.0);
        REQUIRE(rows[i][2] == 0.0);
      }
      if (i > 0) {
        mass += 0.5 * (rows[i][2] + rows[i - 1][2]) * (rows[i][0] - rows[i - 1][0]);
      }
    }
    CHECK(std::abs(mass - 1.0) < 1e-3);
  }
  CHECK_THROWS_AS(export_density(trained.model.head_density(trained.model.prepare(d.test[1].series), 0), 1),
                  ArgumentError);
}

TEST_CASE("density export writes the support sidecar") {
  const auto dir = std::filesystem::temp_directory_path() / "contatt_export_test";
  std::filesystem::create_directories(dir);
  const BaseDensity base = BaseDensity::uniform(0.0, 1.0);
  const AttentionDensity d(Family::continuous_sparsemax,
                           cts_sparsemax_from_moments(0.4, 0.1, base, build_rule(base, 16, 8)));
  const std::string path = (dir / "density.csv").string();
  write_density_export(path, export_density(d, 50));
  CHECK(data_rows(read_text_file(path)) == 50);
  const std::string sidecar = read_text_file(path + ".support.txt");
  CHECK(sidecar.rfind("lo,hi\n", 0) == 0);
  CHECK(data_rows(sidecar) == 1);
  std::filesystem::remove_all(dir);
}

}
