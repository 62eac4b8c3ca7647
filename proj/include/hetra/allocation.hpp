#pragma once

// Allocation records exchanged between the macro tier, the small-cell tier
// and the experiment harness.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hetra/model.hpp"

namespace hetra {

/// Macrocell sub-channel indicators, powers and tolerable interference.
struct MacroAllocation {
  Eigen::MatrixXi gamma;      // M x N, 0/1
  Eigen::MatrixXd power;      // M x N, W
  Eigen::MatrixXd tolerable;  // M x N, W; i_max where gamma == 0
  int n_ac = 0;

  /// All-unallocated record.
  static MacroAllocation empty(const Scenario& scenario);

  /// MUE owning sub-channel n, or -1.
  int owner(int n) const;
  /// Owner-side tolerable level on n; i_max-free channels report +inf.
  double channel_limit(int n) const;
  /// Sum of power over every allocated entry.
  double total_power() const;
  /// Sum of tolerable levels over allocated entries only (i_max excluded).
  double finite_tolerable_sum() const;
};

/// Cross-tier interference seen by an SUE on sub-channel n:
/// sum_m gamma P g_{B,f}.
double macro_interference_at_sue(const MacroAllocation& macro,
                                 const ChannelGains& gains, int sue_global,
                                 int n);

enum class AllocationMode { kExact, kRelaxed };

struct CellAllocation {
  Eigen::MatrixXd gamma;  // F_s x N shares
  Eigen::MatrixXd power;  // F_s x N actual power, W
  Eigen::VectorXd admit;  // F_s
};

/// Small-cell shares, actual powers and admission variables.
struct SmallCellAllocation {
  std::vector<CellAllocation> cells;
  AllocationMode mode = AllocationMode::kRelaxed;

  static SmallCellAllocation zeros(const Scenario& scenario, AllocationMode mode);

  double total_admitted() const;
  double total_share() const;
};

/// sum_s sum_f P~_{s,f}^n g_{s,m(n)}^n, or 0 when n has no macro owner.
double cross_tier_interference(const SmallCellAllocation& alloc,
                               const MacroAllocation& macro,
                               const ChannelGains& gains, int n);

/// Rows: m,n,gamma,power_W,tolerable_W.
std::string macro_allocation_csv(const MacroAllocation& macro);

/// Rows s,f,n,gamma,power_W for every entry, then s,f,admit rows.
std::string small_allocation_csv(const SmallCellAllocation& alloc);

}  // namespace hetra
