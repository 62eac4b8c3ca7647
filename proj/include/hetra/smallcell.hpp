#pragma once

// Centralized small-cell tier: joint admission control and sub-channel /
// power allocation, exact (binary shares and admissions) at desk scale and
// as the time-sharing convex relaxation.

#include <string>
#include <vector>

#include "hetra/allocation.hpp"
#include "hetra/model.hpp"

namespace hetra {

/// (1 - eps) sum y - eps sum Gamma.
double objective_value(const SmallCellAllocation& alloc, double epsilon);

/// Gamma log2(1 + (P~ g / Gamma) / (I_B + N_o)); zero at Gamma = P~ = 0.
/// Throws std::invalid_argument for Gamma = 0 with P~ > 0.
double perspective_rate(double gamma, double p_actual, double gain,
                        double macro_interference, double noise);

/// Achieved rate (bps/Hz) of SUE f in cell s.
double sue_rate(const SmallCellAllocation& alloc, const MacroAllocation& macro,
                const ChannelGains& gains, const Scenario& scenario, int s, int f);

struct Violation {
  std::string constraint;  // "C1" rate, "C2" power, "C3" cross-tier, "C4"
                           // share/power coupling, "C5" share sum, "bounds"
  int s = -1;
  int f = -1;
  int n = -1;
  double slack = 0.0;  // negative: amount by which the constraint is broken
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<Violation> violations;
  double max_interference_ratio = 0.0;  // max over owned n of load / limit

  int count(const std::string& constraint) const;
};

/// Evaluates every constraint of the small-cell problem for `alloc`. The
/// tolerance is relative to each constraint's scale.
FeasibilityReport check_feasible(const SmallCellAllocation& alloc,
                                 const MacroAllocation& macro,
                                 const ChannelGains& gains, const Scenario& scenario,
                                 double tol = 1e-9);

/// Global optimum of the binary problem by enumerating admission and
/// sub-channel patterns; each pattern's continuous power problem is a
/// convex feasibility test. Ties in objective go to the lower total power.
/// Guard: sum_s F_s N <= max_binaries.
SmallCellAllocation solve_minlp_exact(const MacroAllocation& macro,
                                      const ChannelGains& gains,
                                      const Scenario& scenario,
                                      int max_binaries = 24);

/// Largest number of SUEs admitted by any feasible binary pattern, ignoring
/// the sub-channel cost. Same guard as solve_minlp_exact.
int max_admissible(const MacroAllocation& macro, const ChannelGains& gains,
                   const Scenario& scenario, int max_binaries = 24);

struct RelaxationOptions {
  double gap_tol = 1e-9;
};

struct RelaxedSolution {
  SmallCellAllocation allocation;
  double objective = 0.0;
  double gap_bound = 0.0;
  bool converged = false;
  std::string message;
};

/// Time-sharing relaxation: Gamma in [0, 1] as time shares, y in [0, 1] as
/// fractional rate satisfaction, perspective rates; solved by the barrier
/// method. A non-converged solve returns the last iterate and a message.
RelaxedSolution solve_convex_relaxation(const MacroAllocation& macro,
                                        const ChannelGains& gains,
                                        const Scenario& scenario,
                                        const RelaxationOptions& options = {});

}  // namespace hetra
