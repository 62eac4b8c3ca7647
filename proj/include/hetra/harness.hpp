#pragma once

// Monte-Carlo experiment runner: sweeps one scenario parameter, runs a set
// of macro x small-cell solver chains on common random realizations, and
// reports the admission / channel-usage / objective statistics.

#include <cstdint>
#include <string>
#include <vector>

#include "hetra/allocation.hpp"
#include "hetra/model.hpp"

namespace hetra {

/// sum y / F x 100 (fractional y counted as is).
double metric_admitted(const SmallCellAllocation& alloc, const Scenario& scenario);
/// Share of SUEs with y >= 0.999, in percent.
double metric_admitted_rounded(const SmallCellAllocation& alloc, const Scenario& scenario);
/// sum Gamma / (S N) x 100.
double metric_channel_usage(const SmallCellAllocation& alloc, const Scenario& scenario);

enum class MacroMethod { kProposed, kTraditional };
enum class SmallMethod { kExact, kConvex, kDistributed };

struct SolverChain {
  MacroMethod macro = MacroMethod::kProposed;
  SmallMethod small = SmallMethod::kConvex;
  std::string label;  // "<macro>+<small>" when empty
};

std::string chain_label(const SolverChain& chain);

struct ExperimentConfig {
  std::string name = "experiment";
  ScenarioConfig scenario;
  /// num_mues, num_channels, rate_mue, rate_sue, p_small_max or wall_loss_db.
  std::string sweep_variable = "rate_mue";
  std::vector<double> sweep_values;
  std::vector<SolverChain> solvers;
  int realizations = 50;
  std::uint64_t seed = 1;
  double gap_tol = 1e-2;  // distributed solver
  int l_max = 200;        // distributed solver
  double bisection_delta = 1e-3;
  int threads = 0;  // 0: hardware concurrency
};

/// JSON experiment file; see docs/config.md.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Applies one sweep value to a scenario config.
void apply_sweep(ScenarioConfig& config, const std::string& variable, double value);

/// Seed of realization r. Independent of the sweep point, so every point
/// sees the same positions and fading draws.
std::uint64_t realization_seed(std::uint64_t base, int realization);

struct RealizationRecord {
  double sweep_value = 0.0;
  std::string solver;
  int realization = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";  // ok | infeasible | nonconverged | error
  double admitted_pct = 0.0;
  double admitted_rounded_pct = 0.0;
  double channel_usage_pct = 0.0;
  double objective = 0.0;
};

struct MetricSummary {
  double mean = 0.0;
  double stderr_ = 0.0;
  int n = 0;
};

struct ExperimentResult {
  std::string name;
  std::string sweep_variable;
  std::vector<double> sweep_values;
  std::vector<std::string> solvers;
  int realizations = 0;
  std::vector<RealizationRecord> records;  // point-major, then solver, then realization

  static const std::vector<std::string>& metrics();

  /// Mean and standard error over the successful realizations. The metric
  /// "failures" counts the unsuccessful ones (mean = count, n = total).
  MetricSummary summary(std::size_t point, const std::string& solver,
                        const std::string& metric) const;
  /// Means of `metric` across the sweep for one solver.
  std::vector<double> means(const std::string& solver, const std::string& metric) const;
};

/// Runs every (point, realization) pair, realizations in parallel.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Summary CSV (sweep_value,solver,metric,mean,stderr,n_realizations) at
/// `path` and the per-realization rows at the same path with a _raw suffix.
void write_csv(const ExperimentResult& result, const std::string& path);

/// "<stem>_raw<ext>" for "<stem><ext>".
std::string raw_path(const std::string& path);

}  // namespace hetra
