// hetra: solve single realizations, run experiment sweeps, or run the
// brute-force cross-checks.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hetra/assignment.hpp"
#include "hetra/csv.hpp"
#include "hetra/distributed.hpp"
#include "hetra/harness.hpp"
#include "hetra/macro.hpp"
#include "hetra/model.hpp"
#include "hetra/smallcell.hpp"

using namespace hetra;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 1;
  int realizations = 0;
  double gap_tol = 1e-2;
  int l_max = 200;
  std::string out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Random seed");
  app->add_option("--realizations", c.realizations, "Number of realizations");
  app->add_option("--gap-tol", c.gap_tol, "Relative duality-gap tolerance (distributed)");
  app->add_option("--l-max", c.l_max, "Iteration limit (distributed)");
}

ScenarioConfig default_scenario() {
  ScenarioConfig cfg;
  cfg.topology.small_cells = {{-10.0, -100.0}, {10.0, -100.0}};
  cfg.topology.num_mues = 3;
  cfg.topology.sues_per_cell = 2;
  cfg.radio.num_channels = 3;
  cfg.radio.rate_mue = 5.0;
  cfg.radio.rate_sue = 5.0;
  return cfg;
}

struct Realization {
  Scenario scenario;
  ChannelGains gains;
};

Realization realize(const Common& c) {
  ScenarioConfig cfg = c.config.empty() ? default_scenario() : load_scenario_config(c.config);
  cfg.seed = c.seed;
  Rng rng(c.seed);
  Realization r{build_scenario(cfg, rng), {}};
  r.gains = realize_gains(r.scenario, rng);
  return r;
}

MacroAllocation solve_macro(const std::string& method, const Realization& r) {
  if (method == "traditional") return bisect_ith(r.gains, r.scenario).allocation;
  return solve_proposed(r.gains, r.scenario);
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
  } else {
    csv::write_file(path, text);
  }
}

int cmd_oracle(const Common& c) {
  const int count = c.realizations > 0 ? c.realizations : 20;
  Rng rng(c.seed);
  int failures = 0;

  // Assignment against permutation enumeration.
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_real_distribution<double> w(0.0, 1.0);
  int assign_bad = 0;
  for (int i = 0; i < count; ++i) {
    const int m = dim(rng);
    const int n = m + std::uniform_int_distribution<int>(0, 8 - m)(rng);
    Eigen::MatrixXd weights(m, n);
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < n; ++b) weights(a, b) = w(rng);
    }
    if (solve_assignment(weights).objective != brute_force_assignment(weights).objective) {
      ++assign_bad;
    }
  }
  std::printf("assignment vs enumeration: %d/%d mismatches\n", assign_bad, count);
  failures += assign_bad;

  int macro_bad = 0;
  int small_bad = 0;
  int checked = 0;
  for (int i = 0; i < count; ++i) {
    ScenarioConfig cfg = default_scenario();
    Rng r2(realization_seed(c.seed, i));
    const Scenario sc = build_scenario(cfg, r2);
    const ChannelGains g = realize_gains(sc, r2);
    MacroAllocation mac;
    try {
      mac = solve_proposed(g, sc);
    } catch (const InfeasibleError&) {
      continue;
    }
    ++checked;
    const auto opt = brute_force_max_interference(g, sc, sc.num_channels);
    const double ref = mac.finite_tolerable_sum();
    const int free_channels = sc.num_channels - mac.n_ac;
    if (opt.unconstrained_channels != free_channels ||
        std::abs(opt.finite_sum - ref) > 1e-9 * std::max(1e-30, std::abs(ref))) {
      ++macro_bad;
    }
    const auto exact = solve_minlp_exact(mac, g, sc);
    const auto relaxed = solve_convex_relaxation(mac, g, sc);
    const double exact_obj = objective_value(exact, sc.epsilon);
    if (relaxed.objective < exact_obj - 1e-8 ||
        max_admissible(mac, g, sc) > static_cast<int>(std::lround(exact.total_admitted()))) {
      ++small_bad;
    }
  }
  std::printf("problem (4) brute force vs assignment: %d/%d mismatches\n", macro_bad, checked);
  std::printf("exact small cell vs relaxation / admission search: %d/%d mismatches\n",
              small_bad, checked);
  failures += macro_bad + small_bad;
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tier-aware OFDMA resource allocation for macro / small-cell networks"};
  app.require_subcommand(1);

  Common macro_opts;
  std::string macro_method = "proposed";
  auto* macro_cmd = app.add_subcommand("macro", "Solve the macrocell tier for one realization");
  add_common(macro_cmd, macro_opts);
  macro_cmd->add_option("--config", macro_opts.config, "Scenario config (JSON)");
  macro_cmd->add_option("--method", macro_method, "proposed | traditional")
      ->check(CLI::IsMember({"proposed", "traditional"}));
  macro_cmd->add_option("--out", macro_opts.out, "Allocation CSV (stdout if omitted)");

  Common small_opts;
  std::string solver = "convex";
  std::string small_macro = "proposed";
  std::string trace_path;
  auto* small_cmd = app.add_subcommand("smallcell", "Solve the small-cell tier for one realization");
  add_common(small_cmd, small_opts);
  small_cmd->add_option("--config", small_opts.config, "Scenario config (JSON)");
  small_cmd->add_option("--solver", solver, "exact | convex | distributed")
      ->check(CLI::IsMember({"exact", "convex", "distributed"}));
  small_cmd->add_option("--macro-method", small_macro, "proposed | traditional")
      ->check(CLI::IsMember({"proposed", "traditional"}));
  small_cmd->add_option("--out", small_opts.out, "Allocation CSV (stdout if omitted)");
  small_cmd->add_option("--trace", trace_path, "Convergence trace CSV (distributed)");

  Common exp_opts;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a Monte-Carlo sweep");
  add_common(exp_cmd, exp_opts);
  exp_cmd->add_option("--config", exp_opts.config, "Experiment config (JSON)")->required();
  exp_cmd->add_option("--out", exp_opts.out, "Output directory")->required();

  Common oracle_opts;
  auto* oracle_cmd = app.add_subcommand("oracle", "Cross-check solvers against brute force");
  add_common(oracle_cmd, oracle_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (macro_cmd->parsed()) {
      const auto r = realize(macro_opts);
      const auto mac = solve_macro(macro_method, r);
      emit(macro_opts.out, macro_allocation_csv(mac));
      std::fprintf(stderr, "allocated channels: %d, total power: %.6g W\n", mac.n_ac,
                   mac.total_power());
      return 0;
    }
    if (small_cmd->parsed()) {
      const auto r = realize(small_opts);
      const auto mac = solve_macro(small_macro, r);
      SmallCellAllocation alloc;
      if (solver == "exact") {
        alloc = solve_minlp_exact(mac, r.gains, r.scenario);
      } else if (solver == "convex") {
        auto res = solve_convex_relaxation(mac, r.gains, r.scenario);
        if (!res.converged) std::fprintf(stderr, "warning: %s\n", res.message.c_str());
        alloc = std::move(res.allocation);
      } else {
        DistributedOptions opt;
        opt.gap_tol = small_opts.gap_tol;
        opt.l_max = small_opts.l_max;
        auto res = run_algorithm2(mac, r.gains, r.scenario, opt);
        std::fprintf(stderr, "%s after %zu iterations\n", res.status.c_str(), res.trace.size());
        if (!trace_path.empty()) csv::write_file(trace_path, trace_csv(res.trace));
        alloc = std::move(res.allocation);
      }
      emit(small_opts.out, small_allocation_csv(alloc));
      const auto rep = check_feasible(alloc, mac, r.gains, r.scenario);
      std::fprintf(stderr, "objective %.9g, admitted %.2f%%, channel usage %.2f%%, %s\n",
                   objective_value(alloc, r.scenario.epsilon),
                   metric_admitted(alloc, r.scenario), metric_channel_usage(alloc, r.scenario),
                   rep.feasible ? "feasible" : "INFEASIBLE");
      return rep.feasible ? 0 : 2;
    }
    if (exp_cmd->parsed()) {
      auto cfg = load_experiment_config(exp_opts.config);
      if (exp_cmd->count("--seed")) cfg.seed = exp_opts.seed;
      if (exp_opts.realizations > 0) cfg.realizations = exp_opts.realizations;
      if (exp_cmd->count("--gap-tol")) cfg.gap_tol = exp_opts.gap_tol;
      if (exp_cmd->count("--l-max")) cfg.l_max = exp_opts.l_max;
      std::filesystem::create_directories(exp_opts.out);
      const auto res = run_experiment(cfg);
      const auto path = (std::filesystem::path(exp_opts.out) / (cfg.name + ".csv")).string();
      write_csv(res, path);
      std::fprintf(stderr, "wrote %s and %s\n", path.c_str(), raw_path(path).c_str());
      return 0;
    }
    if (oracle_cmd->parsed()) return cmd_oracle(oracle_opts);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
