#pragma once

// Dual decomposition of the relaxed small-cell problem over the cross-tier
// interference constraints: per-cell subproblems priced by eta, ellipsoid
// updates of the prices, and primal feasibility recovery.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hetra/allocation.hpp"
#include "hetra/model.hpp"

namespace hetra {

/// Prices and ellipsoid geometry. The ellipsoid lives in normalized price
/// coordinates z with eta = scale .* max(z, 0); only `active` channels
/// (macro-owned with a positive limit) carry a price.
struct DualState {
  Eigen::VectorXd eta;               // N, 1/W
  Eigen::VectorXd ellipsoid_center;  // N, normalized
  Eigen::MatrixXd ellipsoid_shape;   // N x N, normalized
  Eigen::VectorXd scale;             // N, 1/W per normalized unit
  std::vector<bool> active;
  int iteration = 0;
  double best_upper = 0.0;
  double best_lower = 0.0;

  int num_active() const;
};

/// Initial ellipsoid: the ball around the box [0, 2 B / I_n] over active
/// channels, B = (1 - eps) F bounding the primal optimum.
DualState initial_dual_state(const MacroAllocation& macro, const Scenario& scenario);

/// Objective plus sum_n eta^n (I^n - interference^n) over macro-owned n.
double lagrangian_value(const SmallCellAllocation& alloc, const MacroAllocation& macro,
                        const ChannelGains& gains, const Scenario& scenario,
                        const Eigen::VectorXd& eta);

struct SubproblemResult {
  CellAllocation cell;
  double value = 0.0;      // g_s(eta) at the returned point
  double gap_bound = 0.0;  // value + gap_bound >= true g_s(eta)
  bool converged = false;
  std::string message;
};

/// Maximizes cell s's priced objective. Reads only cell s's own gains, its
/// cross gains to the MUEs, the macro allocation and eta.
SubproblemResult solve_subproblem(int s, const MacroAllocation& macro,
                                  const ChannelGains& gains, const Scenario& scenario,
                                  const Eigen::VectorXd& eta, double gap_tol = 1e-9);

struct DualEvaluation {
  SmallCellAllocation allocation;  // subproblem maximizers
  double value = 0.0;
  double gap_bound = 0.0;
  bool converged = true;
};

/// Solves every subproblem (concurrently when `parallel`) and assembles
/// g(eta) = sum_s g_s(eta) + sum_n eta^n I^n.
DualEvaluation evaluate_dual(const MacroAllocation& macro, const ChannelGains& gains,
                             const Scenario& scenario, const Eigen::VectorXd& eta,
                             double gap_tol = 1e-9, bool parallel = true);

double dual_function(const MacroAllocation& macro, const ChannelGains& gains,
                     const Scenario& scenario, const Eigen::VectorXd& eta);

/// d^n = I^n - sum_{s,f} P~ g_{s,m(n)} on macro-owned channels, 0 elsewhere.
Eigen::VectorXd subgradient(const SmallCellAllocation& alloc_at_eta,
                            const MacroAllocation& macro, const ChannelGains& gains,
                            const Scenario& scenario);

enum class StepStatus { kOk, kZeroSubgradient, kDegenerate };

struct StepResult {
  DualState state;
  StepStatus status = StepStatus::kOk;
};

/// Central cut keeping {z : d_z^T (z - c) <= 0} with d_z = d .* scale over
/// the active block. A center with a negative active component is cut by
/// that coordinate instead (prices are nonnegative). Shape conditioning
/// above 1e12 reports kDegenerate and leaves the state unchanged. A positive
/// `depth` deepens the cut to d_z^T (z - c) <= -depth (capped at 0.9 of the
/// ellipsoid's extent along d_z); feasibility cuts are always deep.
StepResult ellipsoid_step(const DualState& state, const Eigen::VectorXd& d,
                          double depth = 0.0);

enum class RecoveryMode { kRescale, kReoptimize };

/// Divides every power on a channel whose load exceeds its limit by the
/// overload ratio, then sets y = min(1, rate / R_f) with shares fixed. The
/// kReoptimize mode re-solves shares and admissions with the scaled powers.
SmallCellAllocation recover_feasible(const SmallCellAllocation& alloc,
                                     const MacroAllocation& macro,
                                     const ChannelGains& gains, const Scenario& scenario,
                                     RecoveryMode mode = RecoveryMode::kRescale);

struct TraceRow {
  int iteration = 0;
  double dual_upper = 0.0;    // best so far
  double primal_lower = 0.0;  // best so far
  double gap = 0.0;
  double max_violation_ratio = 0.0;
  double dual_value = 0.0;    // this iteration
  double primal_value = 0.0;  // this iteration
};

struct DistributedOptions {
  int l_max = 200;
  double gap_tol = 1e-2;
  RecoveryMode recovery = RecoveryMode::kRescale;
  double subproblem_gap_tol = 1e-9;
  bool parallel = true;
};

struct DistributedResult {
  SmallCellAllocation allocation;  // best recovered allocation
  double objective = 0.0;
  DualState state;
  std::vector<TraceRow> trace;
  bool converged = false;
  std::string status;
};

/// Iteration 1 evaluates eta = 0; later iterations evaluate the ellipsoid
/// center and cut it.
DistributedResult run_algorithm2(const MacroAllocation& macro, const ChannelGains& gains,
                                 const Scenario& scenario,
                                 const DistributedOptions& options = {});

/// Columns: iteration,dual_upper,primal_lower,gap,max_violation_ratio.
std::string trace_csv(const std::vector<TraceRow>& trace);

}  // namespace hetra
