#pragma once

// Builder for the time-sharing small-cell program over a subset of cells.
// Variables: per active (s, f, n) a share and a power normalized by
// P_s_max, and per SUE with at least one active channel an admission value.

#include <vector>

#include <Eigen/Dense>

#include "hetra/allocation.hpp"
#include "hetra/convex.hpp"
#include "hetra/model.hpp"

namespace hetra::detail {

struct CellSlot {
  int s = 0;
  int f = 0;
  int n = 0;
  int share = -1;
  int power = -1;  // -1 when the power is fixed
  double fixed_power = 0.0;  // normalized
};

struct CellAdmit {
  int s = 0;
  int f = 0;
  int var = -1;  // -1: no active channel, admission pinned at 0
};

struct CellProgramSpec {
  std::vector<int> cells;
  bool cross_tier = true;              // enforce the interference limits
  const Eigen::VectorXd* prices = nullptr;  // per-channel price, 1/W
  const SmallCellAllocation* fixed_powers = nullptr;
};

struct CellProgram {
  convex::Program program;
  Eigen::VectorXd start;
  std::vector<CellSlot> slots;
  std::vector<CellAdmit> admits;

  /// Writes the cells of this program into `out` (other cells untouched).
  void extract(const Eigen::VectorXd& x, const Scenario& scenario,
               SmallCellAllocation& out) const;
};

/// Sub-channel n is unusable by the small cells: its owner tolerates no
/// interference.
bool channel_blocked(const MacroAllocation& macro, int n);

/// SINR-per-watt a = g / (I_B + N_o) of SUE f in cell s on channel n.
double sue_gain_ratio(const MacroAllocation& macro, const ChannelGains& gains,
                      const Scenario& scenario, int s, int f, int n);

CellProgram build_cell_program(const Scenario& scenario, const ChannelGains& gains,
                               const MacroAllocation& macro,
                               const CellProgramSpec& spec);

}  // namespace hetra::detail
