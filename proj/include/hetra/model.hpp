#pragma once

// Two-tier network model: topology, radio parameters, channel realization
// and the SINR primitives shared by every solver.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hetra {

/// Random stream used for topology and channel realization.
using Rng = std::mt19937_64;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point& a, const Point& b);

/// Static description of one network snapshot. Rates are spectral
/// efficiencies in bps/Hz; powers in W.
struct Scenario {
  Point macro_position{0.0, 0.0};
  double macro_radius = 300.0;
  Point hotspot_center{0.0, -100.0};
  double hotspot_side = 20.0;
  std::vector<Point> small_cells;
  std::vector<Point> mues;
  std::vector<std::vector<Point>> sues;  // sues[s] served by small_cells[s]

  int num_channels = 10;
  double delta_f = 180e3;
  double p_macro_max = 20.0;
  double p_small_max = 0.03;
  double noise = 1e-13;
  double wall_loss_db = 1.0;
  std::vector<double> rate_mue;  // one entry per MUE
  std::vector<double> rate_sue;  // one entry per SUE, global index
  double i_max = 1e3;
  double epsilon = 0.0;
  std::uint64_t rng_seed = 0;

  int num_cells() const { return static_cast<int>(small_cells.size()); }
  int num_mues() const { return static_cast<int>(mues.size()); }
  int num_sues() const;
  int sues_in(int s) const { return static_cast<int>(sues[s].size()); }
  /// Global index of SUE f of cell s.
  int sue_index(int s, int f) const;

  /// Default weight 0.9 / (1 + S N).
  double default_epsilon() const;

  /// Throws std::invalid_argument on the first broken invariant.
  void validate() const;
};

enum class LinkKind { kSmallToSue, kSmallToMue, kMacroToSue, kMacroToMue };

/// Path loss in dB for the given link type. Distances below 1 m are
/// evaluated at 1 m.
double path_loss_db(LinkKind kind, double distance_m, double wall_loss_db);

/// Shadowing standard deviation (dB) used for each link type.
double shadowing_sigma_db(LinkKind kind);

/// Linear power gains g_{i,j}^n.
struct ChannelGains {
  Eigen::MatrixXd macro_mue;               // M x N
  Eigen::MatrixXd macro_sue;               // F x N, global SUE index
  std::vector<Eigen::MatrixXd> small_sue;  // per cell, F_s x N
  std::vector<Eigen::MatrixXd> small_mue;  // per cell, M x N

  /// Throws std::invalid_argument if dimensions disagree with the scenario
  /// or an entry is not finite and strictly positive.
  void validate(const Scenario& scenario) const;
};

struct GainOptions {
  bool shadowing = true;
  bool fading = true;
};

/// Draws path loss + log-normal shadowing + Rayleigh (unit-mean
/// exponential power) fading for every link and sub-channel. Each link
/// block uses its own substream seeded from `rng`, and rows are filled
/// entity by entity, so adding UEs leaves the gains of existing UEs intact.
ChannelGains realize_gains(const Scenario& scenario, Rng& rng,
                           const GainOptions& options = {});

/// SINR at an MUE: P g / (I + N_o).
double sinr_macro(double power, double gain, double interference, double noise);

/// SINR at an SUE with cross-tier interference from the macrocell.
double sinr_sue(double power, double gain_own, double macro_interference,
                double noise);

// ---------------------------------------------------------------------------
// Topology generation.

/// Where the UEs go. Explicit positions, when present, override the
/// random placement.
struct Topology {
  Point macro_position{0.0, 0.0};
  double macro_radius = 300.0;
  Point hotspot_center{0.0, -100.0};
  double hotspot_side = 20.0;
  std::vector<Point> small_cells;
  int sues_per_cell = 2;
  int num_mues = 3;
  double sue_inner_radius = 3.0;
  double sue_outer_radius = 10.0;
  std::vector<Point> mue_positions;
  std::vector<std::vector<Point>> sue_positions;
};

struct RadioParams {
  int num_channels = 10;
  double delta_f = 180e3;
  double p_macro_max = 20.0;
  double p_small_max = 0.03;
  double noise = 1e-13;
  double wall_loss_db = 1.0;
  double rate_mue = 5.0;
  double rate_sue = 5.0;
  double i_max = 1e3;
  double epsilon = 0.0;  // <= 0 selects the default 0.9 / (1 + S N)
};

struct ScenarioConfig {
  Topology topology;
  RadioParams radio;
  std::uint64_t seed = 1;
};

/// Places MUEs uniformly in the hotspot square and SUEs uniformly (by area)
/// in the annulus around their cell, then fills the radio parameters.
Scenario build_scenario(const ScenarioConfig& config, Rng& rng);

/// Reads a JSON scenario config; see docs/config.md for the schema.
ScenarioConfig load_scenario_config(const std::string& path);
ScenarioConfig parse_scenario_config(const std::string& json_text);

}  // namespace hetra
