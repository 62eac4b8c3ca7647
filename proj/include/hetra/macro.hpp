#pragma once

// Macrocell-tier resource allocation: the tolerable-interference
// maximizing scheme (reduced to an assignment problem) and the min-sum-power
// baseline with its interference-threshold bisection.

#include <stdexcept>
#include <string>
#include <vector>

#include "hetra/allocation.hpp"
#include "hetra/model.hpp"

namespace hetra {

/// A rate requirement cannot be met.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exhaustive routine was asked to enumerate beyond its guard.
class SizeLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest interference an MUE can absorb on one sub-channel while still
/// meeting rate R (bps/Hz) at power P: P g / (2^R - 1) - N_o, capped at
/// i_max. Throws InfeasibleError when the value would be negative.
double tolerable_interference(double power, double gain, double rate,
                              double noise, double i_max);

/// Max-sum-gain assignment of one sub-channel per MUE, equal power
/// P_B_max / M, tolerable levels from tolerable_interference.
MacroAllocation solve_proposed(const ChannelGains& gains, const Scenario& scenario);

/// Exhaustive optimum of the tolerable-interference problem. Each
/// sub-channel is either unused, owned by an MUE with a finite (rate-tight)
/// level, or owned at the i_max level. Objectives compare first by the
/// number of i_max entries, then by the finite sum, which is how an
/// arbitrarily large i_max orders them.
struct InterferenceOptimum {
  int unconstrained_channels = 0;
  double finite_sum = 0.0;
  MacroAllocation allocation;  // gamma marks the rate-carrying channels
};

InterferenceOptimum brute_force_max_interference(const ChannelGains& gains,
                                                 const Scenario& scenario,
                                                 int max_channels_per_mue);

/// Min-sum-power allocation with a uniform tolerable level I_th on every
/// allocated sub-channel, solved in the dual domain.
MacroAllocation solve_traditional(const ChannelGains& gains, const Scenario& scenario,
                                  double i_th);

/// Exhaustive min-sum-power over every sub-channel partition, with exact
/// water-filling per MUE. Guard: (M+1)^N <= 2e6.
MacroAllocation brute_force_traditional(const ChannelGains& gains,
                                        const Scenario& scenario, double i_th);

struct BisectionResult {
  double i_th = 0.0;
  MacroAllocation allocation;
  int iterations = 0;
  int bracket_doublings = 0;
};

/// Threshold bisection: finds I_th with |sum P - P_B_max| <= delta.
/// Total power grows with I_th, so the bracket needs sum P(lo) <= P_B_max
/// <= sum P(hi); hi is doubled up to 20 times to establish it.
BisectionResult bisect_ith(const ChannelGains& gains, const Scenario& scenario,
                           double i_th_lo, double i_th_hi, double delta);

/// Bisection with the bracket [0, P_B_max max g / (2^R - 1)].
BisectionResult bisect_ith(const ChannelGains& gains, const Scenario& scenario,
                           double delta = 1e-3);

/// Achieved rate of MUE m (bps/Hz) when every allocated channel sees the
/// interference in `interference` (M x N).
double macro_rate(const MacroAllocation& macro, const ChannelGains& gains,
                  const Scenario& scenario, int m,
                  const Eigen::MatrixXd& interference);

namespace detail {

/// Minimum total power meeting `rate` on channels with normalized gains
/// q_n = g_n / (I + N_o); returns per-channel powers.
std::vector<double> water_fill_min_power(const std::vector<double>& q, double rate);

/// Highest rate reachable with total power `budget`.
double water_fill_max_rate(const std::vector<double>& q, double budget);

}  // namespace detail

}  // namespace hetra
