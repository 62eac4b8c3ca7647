#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hetra/csv.hpp"
#include "hetra/harness.hpp"
#include "test_util.hpp"

namespace hetra {
namespace {

namespace fs = std::filesystem;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "hetra_test_harness";
  fs::create_directories(dir);
  return dir / name;
}

ExperimentConfig small_experiment() {
  ExperimentConfig cfg;
  cfg.name = "tiny";
  cfg.scenario = fixture::fig8_config();
  cfg.sweep_variable = "rate_mue";
  cfg.sweep_values = {3.0, 6.0};
  cfg.solvers = {{MacroMethod::kProposed, SmallMethod::kConvex, ""},
                 {MacroMethod::kProposed, SmallMethod::kDistributed, ""},
                 {MacroMethod::kTraditional, SmallMethod::kConvex, ""}};
  cfg.realizations = 4;
  cfg.seed = 3;
  return cfg;
}

TEST(Metrics, Examples) {
  Scenario sc = fixture::bare_scenario(2, 2, 1, 3);
  auto a = SmallCellAllocation::zeros(sc, AllocationMode::kExact);
  EXPECT_DOUBLE_EQ(metric_admitted(a, sc), 0.0);
  EXPECT_DOUBLE_EQ(metric_channel_usage(a, sc), 0.0);
  a.cells[0].admit[0] = 1.0;
  a.cells[1].admit[1] = 1.0;
  EXPECT_DOUBLE_EQ(metric_admitted(a, sc), 50.0);
  a.cells[0].gamma(0, 1) = 1.0;
  EXPECT_NEAR(metric_channel_usage(a, sc), 100.0 / 6.0, 1e-12);
  a.cells[0].admit[1] = 0.5;
  EXPECT_DOUBLE_EQ(metric_admitted(a, sc), 62.5);
  EXPECT_DOUBLE_EQ(metric_admitted_rounded(a, sc), 50.0);
  for (int s = 0; s < 2; ++s) a.cells[s].gamma.row(0).setOnes();
  EXPECT_DOUBLE_EQ(metric_channel_usage(a, sc), 100.0);
}

TEST(Sweep, ApplyAndSeeds) {
  ScenarioConfig c = fixture::fig8_config();
  apply_sweep(c, "num_mues", 5.0);
  EXPECT_EQ(c.topology.num_mues, 5);
  apply_sweep(c, "rate_sue", 7.5);
  EXPECT_DOUBLE_EQ(c.radio.rate_sue, 7.5);
  apply_sweep(c, "p_small_max", 0.05);
  EXPECT_DOUBLE_EQ(c.radio.p_small_max, 0.05);
  apply_sweep(c, "wall_loss_db", 10.0);
  EXPECT_DOUBLE_EQ(c.radio.wall_loss_db, 10.0);
  EXPECT_THROW(apply_sweep(c, "bogus", 1.0), std::invalid_argument);
  EXPECT_EQ(realization_seed(5, 3), realization_seed(5, 3));
  EXPECT_NE(realization_seed(5, 3), realization_seed(5, 4));
  EXPECT_NE(realization_seed(5, 3), realization_seed(6, 3));
}

TEST(Config, ParseAndReject) {
  const auto cfg = parse_experiment_config(R"({
    "name": "x",
    "scenario": {"topology": {"num_mues": 2}, "radio": {"num_channels": 4}},
    "sweep": {"variable": "rate_sue", "values": [1, 2]},
    "solvers": [{"macro": "traditional", "small": "exact"}],
    "realizations": 7, "seed": 11, "gap_tol": 0.005, "l_max": 50
  })");
  EXPECT_EQ(cfg.name, "x");
  EXPECT_EQ(cfg.scenario.topology.num_mues, 2);
  EXPECT_EQ(cfg.scenario.radio.num_channels, 4);
  EXPECT_EQ(cfg.sweep_values.size(), 2u);
  ASSERT_EQ(cfg.solvers.size(), 1u);
  EXPECT_EQ(chain_label(cfg.solvers[0]), "traditional+exact");
  EXPECT_EQ(cfg.realizations, 7);
  EXPECT_EQ(cfg.seed, 11u);
  EXPECT_DOUBLE_EQ(cfg.gap_tol, 0.005);
  EXPECT_EQ(cfg.l_max, 50);

  EXPECT_THROW(parse_experiment_config("{"), std::invalid_argument);
  EXPECT_THROW(parse_experiment_config(R"({"sweep": {"variable": "rate_sue", "values": []}})"),
               std::invalid_argument);
  EXPECT_THROW(
      parse_experiment_config(R"({"sweep": {"variable": "nope", "values": [1]}})"),
      std::invalid_argument);
  EXPECT_THROW(parse_experiment_config(
                   R"({"sweep": {"variable": "rate_sue", "values": [1]},
                       "solvers": [{"small": "magic"}]})"),
               std::invalid_argument);
}

TEST(Csv, EmptyResultWritesHeaderOnly) {
  ExperimentResult empty;
  const auto path = scratch("empty.csv").string();
  write_csv(empty, path);
  EXPECT_EQ(slurp(path), "sweep_value,solver,metric,mean,stderr,n_realizations\n");
  EXPECT_EQ(raw_path(path), scratch("empty_raw.csv").string());
  EXPECT_TRUE(fs::exists(raw_path(path)));
}

class TinyExperiment : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { result_ = new ExperimentResult(run_experiment(small_experiment())); }
  static void TearDownTestSuite() {
    delete result_;
    result_ = nullptr;
  }
  static ExperimentResult* result_;
};
ExperimentResult* TinyExperiment::result_ = nullptr;

TEST_F(TinyExperiment, RecordsAndPercentages) {
  const auto& r = *result_;
  EXPECT_EQ(r.records.size(), 2u * 3u * 4u);
  for (const auto& rec : r.records) {
    EXPECT_GE(rec.admitted_pct, 0.0);
    EXPECT_LE(rec.admitted_pct, 100.0);
    EXPECT_GE(rec.admitted_rounded_pct, 0.0);
    EXPECT_LE(rec.admitted_rounded_pct, 100.0);
    EXPECT_GE(rec.channel_usage_pct, 0.0);
    EXPECT_LE(rec.channel_usage_pct, 100.0 + 1e-9);
  }
  for (std::size_t p = 0; p < r.sweep_values.size(); ++p) {
    for (const auto& s : r.solvers) {
      const auto f = r.summary(p, s, "failures");
      const auto a = r.summary(p, s, "admitted_pct");
      EXPECT_EQ(f.n, 4);
      EXPECT_EQ(static_cast<int>(f.mean) + a.n, 4);
    }
  }
}

TEST_F(TinyExperiment, DeterministicBytes) {
  const auto a = scratch("det_a.csv").string();
  const auto b = scratch("det_b.csv").string();
  write_csv(*result_, a);
  write_csv(run_experiment(small_experiment()), b);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(raw_path(a)), slurp(raw_path(b)));
}

TEST_F(TinyExperiment, RoundTripMeansAndStderr) {
  const auto path = scratch("rt.csv").string();
  write_csv(*result_, path);
  const auto rows = csv::read_file(path);
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows[0].size(), 6u);
  std::size_t checked = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const double sweep = std::stod(row[0]);
    std::size_t p = 0;
    while (result_->sweep_values[p] != sweep) ++p;
    const auto s = result_->summary(p, row[1], row[2]);
    const double mean = std::stod(row[3]);
    if (std::isnan(s.mean)) {
      EXPECT_TRUE(std::isnan(mean));
    } else {
      EXPECT_EQ(mean, s.mean);
    }
    if (!std::isnan(s.stderr_)) EXPECT_EQ(std::stod(row[4]), s.stderr_);
    EXPECT_EQ(std::stoi(row[5]), s.n);
    ++checked;
  }
  EXPECT_EQ(checked, 2u * 3u * ExperimentResult::metrics().size());

  // stderr recomputed from the raw rows
  const auto raw = csv::read_file(raw_path(path));
  for (std::size_t p = 0; p < result_->sweep_values.size(); ++p) {
    for (const auto& solver : result_->solvers) {
      std::vector<double> v;
      for (std::size_t i = 1; i < raw.size(); ++i) {
        if (std::stod(raw[i][0]) == result_->sweep_values[p] && raw[i][1] == solver &&
            raw[i][4] == "ok") {
          v.push_back(std::stod(raw[i][5]));
        }
      }
      if (v.size() < 2) continue;
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= v.size();
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      const double se = std::sqrt(ss / (v.size() - 1) / v.size());
      EXPECT_NEAR(result_->summary(p, solver, "admitted_pct").stderr_, se, 1e-9);
    }
  }
}

}  // namespace
}  // namespace hetra
