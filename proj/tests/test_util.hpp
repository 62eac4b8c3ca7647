#pragma once

#include <vector>

#include "hetra/allocation.hpp"
#include "hetra/harness.hpp"
#include "hetra/macro.hpp"
#include "hetra/model.hpp"

namespace hetra::fixture {

/// Two cells at (+-10, -100), 2 SUEs each, N = M = 3, R = 5 bps/Hz.
inline ScenarioConfig fig8_config() {
  ScenarioConfig cfg;
  cfg.topology.small_cells = {{-10.0, -100.0}, {10.0, -100.0}};
  cfg.topology.sues_per_cell = 2;
  cfg.topology.num_mues = 3;
  cfg.radio.num_channels = 3;
  cfg.radio.rate_mue = 5.0;
  cfg.radio.rate_sue = 5.0;
  return cfg;
}

struct Instance {
  Scenario scenario;
  ChannelGains gains;
  MacroAllocation macro;
};

/// Realization r of `cfg` with the proposed macro allocation. Returns false
/// when the macro tier is infeasible.
inline bool make_instance(const ScenarioConfig& cfg, std::uint64_t seed, int r,
                          Instance& out) {
  Rng rng(realization_seed(seed, r));
  out.scenario = build_scenario(cfg, rng);
  out.gains = realize_gains(out.scenario, rng);
  try {
    out.macro = solve_proposed(out.gains, out.scenario);
  } catch (const InfeasibleError&) {
    return false;
  }
  return true;
}

/// Scenario with explicit sizes and no geometry; gains are filled by hand.
inline Scenario bare_scenario(int cells, int sues_per_cell, int mues, int channels) {
  Scenario sc;
  for (int s = 0; s < cells; ++s) {
    sc.small_cells.push_back({10.0 * s, -100.0});
    sc.sues.push_back(std::vector<Point>(sues_per_cell, Point{10.0 * s, -95.0}));
  }
  sc.mues.assign(mues, Point{0.0, -100.0});
  sc.num_channels = channels;
  sc.rate_mue.assign(mues, 5.0);
  sc.rate_sue.assign(cells * sues_per_cell, 5.0);
  sc.epsilon = sc.default_epsilon();
  return sc;
}

inline ChannelGains constant_gains(const Scenario& sc, double macro_mue, double macro_sue,
                                   double small_sue, double small_mue) {
  ChannelGains g;
  g.macro_mue = Eigen::MatrixXd::Constant(sc.num_mues(), sc.num_channels, macro_mue);
  g.macro_sue = Eigen::MatrixXd::Constant(sc.num_sues(), sc.num_channels, macro_sue);
  for (int s = 0; s < sc.num_cells(); ++s) {
    g.small_sue.push_back(Eigen::MatrixXd::Constant(sc.sues_in(s), sc.num_channels, small_sue));
    g.small_mue.push_back(Eigen::MatrixXd::Constant(sc.num_mues(), sc.num_channels, small_mue));
  }
  return g;
}

}  // namespace hetra::fixture
