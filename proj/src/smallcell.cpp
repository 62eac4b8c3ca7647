#include "hetra/smallcell.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>

#include "cell_program.hpp"
#include "hetra/convex.hpp"
#include "hetra/macro.hpp"

namespace hetra {

double objective_value(const SmallCellAllocation& alloc, double epsilon) {
  return (1.0 - epsilon) * alloc.total_admitted() - epsilon * alloc.total_share();
}

double perspective_rate(double gamma, double p_actual, double gain,
                        double macro_interference, double noise) {
  if (gamma < 0.0 || p_actual < 0.0) {
    throw std::invalid_argument("perspective_rate: negative share or power");
  }
  if (gamma == 0.0) {
    if (p_actual > 0.0) {
      throw std::invalid_argument("perspective_rate: power on a zero share");
    }
    return 0.0;
  }
  return convex::perspective_log2(gamma, p_actual, gain / (macro_interference + noise));
}

double sue_rate(const SmallCellAllocation& alloc, const MacroAllocation& macro,
                const ChannelGains& gains, const Scenario& scenario, int s, int f) {
  const auto& cell = alloc.cells[s];
  double rate = 0.0;
  for (int n = 0; n < scenario.num_channels; ++n) {
    const double share = cell.gamma(f, n);
    if (!(share > 0.0)) continue;
    const double p = std::max(0.0, cell.power(f, n));
    rate += convex::perspective_log2(share, p,
                                     detail::sue_gain_ratio(macro, gains, scenario, s, f, n));
  }
  return rate;
}

int FeasibilityReport::count(const std::string& constraint) const {
  return static_cast<int>(std::count_if(
      violations.begin(), violations.end(),
      [&](const Violation& v) { return v.constraint == constraint; }));
}

FeasibilityReport check_feasible(const SmallCellAllocation& alloc,
                                 const MacroAllocation& macro,
                                 const ChannelGains& gains, const Scenario& scenario,
                                 double tol) {
  FeasibilityReport rep;
  const double ps = scenario.p_small_max;
  const int num_n = scenario.num_channels;
  const bool exact = alloc.mode == AllocationMode::kExact;
  auto flag = [&](const char* name, int s, int f, int n, double slack) {
    rep.violations.push_back({name, s, f, n, slack});
  };

  for (int s = 0; s < scenario.num_cells(); ++s) {
    const auto& cell = alloc.cells[s];
    double budget = 0.0;
    for (int f = 0; f < scenario.sues_in(s); ++f) {
      const double y = cell.admit[f];
      if (y < -tol) flag("bounds", s, f, -1, y);
      if (y > 1.0 + tol) flag("bounds", s, f, -1, 1.0 - y);
      if (exact && std::min(std::abs(y), std::abs(1.0 - y)) > tol) {
        flag("binary", s, f, -1, -std::min(std::abs(y), std::abs(1.0 - y)));
      }
      for (int n = 0; n < num_n; ++n) {
        const double g = cell.gamma(f, n);
        const double p = cell.power(f, n);
        budget += p;
        if (g < -tol) flag("bounds", s, f, n, g);
        if (p < -tol * ps) flag("bounds", s, f, n, p);
        if (exact) {
          if (std::min(std::abs(g), std::abs(1.0 - g)) > tol) {
            flag("binary", s, f, n, -std::min(std::abs(g), std::abs(1.0 - g)));
          }
          const double slack = g * ps - p;
          if (slack < -tol * ps) flag("C4", s, f, n, slack);
        } else if (g <= 0.0 && p > tol * ps) {
          flag("C4", s, f, n, -p);
        }
      }
      const double demand = y * scenario.rate_sue[scenario.sue_index(s, f)];
      const double slack = sue_rate(alloc, macro, gains, scenario, s, f) - demand;
      if (slack < -tol * std::max(1.0, demand)) flag("C1", s, f, -1, slack);
    }
    if (budget > ps * (1.0 + tol)) flag("C2", s, -1, -1, ps - budget);
    for (int n = 0; n < num_n; ++n) {
      double shares = 0.0;
      for (int f = 0; f < scenario.sues_in(s); ++f) shares += cell.gamma(f, n);
      if (shares > 1.0 + tol) flag("C5", s, -1, n, 1.0 - shares);
    }
  }

  for (int n = 0; n < num_n; ++n) {
    if (macro.owner(n) < 0) continue;
    const double limit = macro.channel_limit(n);
    const double load = cross_tier_interference(alloc, macro, gains, n);
    const double slack = limit - load;
    if (slack < -tol * std::max(limit, scenario.noise)) flag("C3", -1, -1, n, slack);
    const double ratio = limit > 0.0 ? load / limit
                         : (load > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    rep.max_interference_ratio = std::max(rep.max_interference_ratio, ratio);
  }
  rep.feasible = rep.violations.empty();
  return rep;
}

RelaxedSolution solve_convex_relaxation(const MacroAllocation& macro,
                                        const ChannelGains& gains,
                                        const Scenario& scenario,
                                        const RelaxationOptions& options) {
  detail::CellProgramSpec spec;
  for (int s = 0; s < scenario.num_cells(); ++s) spec.cells.push_back(s);
  const auto cp = detail::build_cell_program(scenario, gains, macro, spec);

  convex::Options opt;
  opt.gap_tol = options.gap_tol;
  const auto res = convex::minimize(cp.program, cp.start, opt);

  RelaxedSolution out;
  out.allocation = SmallCellAllocation::zeros(scenario, AllocationMode::kRelaxed);
  cp.extract(res.x, scenario, out.allocation);
  out.objective = objective_value(out.allocation, scenario.epsilon);
  out.gap_bound = res.gap_bound;
  out.converged = res.converged;
  out.message = res.message;
  return out;
}

// ---------------------------------------------------------------------------
// Exact solver.

namespace {

constexpr double kFeasTol = 1e-9;
constexpr std::int64_t kMaxPatterns = 2'000'000;

// One binary pattern: owner SUE per (cell, channel) or -1.
struct Pattern {
  std::vector<std::int8_t> owner;  // index s * N + n
  int admitted = 0;
  int channels = 0;
};

struct Instance {
  const MacroAllocation& macro;
  const ChannelGains& gains;
  const Scenario& sc;
  // Normalized SINR-per-unit-power a P_s_max, per cell, F_s x N.
  std::vector<Eigen::MatrixXd> gain;
  // Upper bound on the rate of one channel: full power capped by the
  // single-cell interference limit.
  std::vector<Eigen::MatrixXd> channel_cap_rate;
};

Instance make_instance(const MacroAllocation& macro, const ChannelGains& gains,
                       const Scenario& sc) {
  Instance in{macro, gains, sc, {}, {}};
  const double ps = sc.p_small_max;
  for (int s = 0; s < sc.num_cells(); ++s) {
    Eigen::MatrixXd a(sc.sues_in(s), sc.num_channels);
    Eigen::MatrixXd cap(sc.sues_in(s), sc.num_channels);
    for (int f = 0; f < sc.sues_in(s); ++f) {
      for (int n = 0; n < sc.num_channels; ++n) {
        a(f, n) = detail::sue_gain_ratio(macro, gains, sc, s, f, n) * ps;
        double pmax = 1.0;
        const int m = macro.owner(n);
        if (m >= 0) {
          pmax = std::min(pmax, macro.channel_limit(n) / (gains.small_mue[s](m, n) * ps));
        }
        cap(f, n) = std::log2(1.0 + a(f, n) * std::max(0.0, pmax));
      }
    }
    in.gain.push_back(a);
    in.channel_cap_rate.push_back(cap);
  }
  return in;
}

void check_guard(const Scenario& sc, int max_binaries) {
  int binaries = 0;
  double patterns = 1.0;
  for (int s = 0; s < sc.num_cells(); ++s) {
    binaries += sc.sues_in(s) * sc.num_channels;
    patterns *= std::pow(sc.sues_in(s) + 1.0, sc.num_channels);
  }
  if (binaries > max_binaries || patterns > static_cast<double>(kMaxPatterns)) {
    throw SizeLimitError("exact small-cell solver: instance beyond the enumeration guard");
  }
}

std::vector<Pattern> enumerate_patterns(const Instance& in) {
  const auto& sc = in.sc;
  const int num_n = sc.num_channels;
  const int slots = sc.num_cells() * num_n;
  std::vector<int> choices(slots);
  for (int s = 0; s < sc.num_cells(); ++s) {
    for (int n = 0; n < num_n; ++n) {
      choices[s * num_n + n] = detail::channel_blocked(in.macro, n) ? 1 : sc.sues_in(s) + 1;
    }
  }
  std::vector<Pattern> out;
  std::vector<int> digit(slots, 0);
  while (true) {
    Pattern p;
    p.owner.resize(slots);
    for (int i = 0; i < slots; ++i) {
      p.owner[i] = static_cast<std::int8_t>(digit[i] - 1);
      if (digit[i] > 0) ++p.channels;
    }
    for (int s = 0; s < sc.num_cells(); ++s) {
      for (int f = 0; f < sc.sues_in(s); ++f) {
        for (int n = 0; n < num_n; ++n) {
          if (p.owner[s * num_n + n] == f) {
            ++p.admitted;
            break;
          }
        }
      }
    }
    out.push_back(std::move(p));
    int i = 0;
    while (i < slots && ++digit[i] == choices[i]) digit[i++] = 0;
    if (i == slots) break;
  }
  return out;
}

struct PatternSolution {
  bool feasible = false;
  double total_power = 0.0;
  SmallCellAllocation allocation;
};

// Quick necessary test: each admitted SUE can reach its rate on its own
// channels with the whole cell budget and the single-cell interference caps.
bool passes_bounds(const Instance& in, const Pattern& p) {
  const auto& sc = in.sc;
  const int num_n = sc.num_channels;
  for (int s = 0; s < sc.num_cells(); ++s) {
    for (int f = 0; f < sc.sues_in(s); ++f) {
      std::vector<double> q;
      double cap = 0.0;
      for (int n = 0; n < num_n; ++n) {
        if (p.owner[s * num_n + n] != f) continue;
        q.push_back(in.gain[s](f, n));
        cap += in.channel_cap_rate[s](f, n);
      }
      if (q.empty()) continue;
      const double demand = sc.rate_sue[sc.sue_index(s, f)];
      const double slack = 1e-9 * std::max(1.0, demand);
      if (cap < demand - slack) return false;
      if (detail::water_fill_max_rate(q, 1.0) < demand - slack) return false;
    }
  }
  return true;
}

// Power program for a fixed pattern. With `max_margin`, the variables are
// the normalized powers plus a margin tau (rate >= tau R) and tau is
// maximized; otherwise the rates are met and the total power minimized.
struct PowerProgram {
  convex::Program program;
  Eigen::VectorXd start;
  std::vector<std::array<int, 3>> slot;  // s, f, n per power variable
};

PowerProgram build_power_program(const Instance& in, const Pattern& p, bool max_margin) {
  const auto& sc = in.sc;
  const int num_n = sc.num_channels;
  PowerProgram pp;
  for (int s = 0; s < sc.num_cells(); ++s) {
    for (int n = 0; n < num_n; ++n) {
      const int f = p.owner[s * num_n + n];
      if (f >= 0) pp.slot.push_back({s, f, n});
    }
  }
  const int np = static_cast<int>(pp.slot.size());
  const int tau = max_margin ? np : -1;
  auto& prog = pp.program;
  prog.num_vars = np + (max_margin ? 1 : 0);
  prog.cost = Eigen::VectorXd::Zero(prog.num_vars);
  if (max_margin) {
    prog.cost[tau] = -1.0;
  } else {
    prog.cost.head(np).setOnes();
  }

  std::vector<convex::LinearConstraint> budget(sc.num_cells());
  std::vector<convex::LinearConstraint> cross(num_n);
  for (int i = 0; i < np; ++i) {
    const auto [s, f, n] = pp.slot[i];
    prog.linear.push_back({{{i, -1.0}}, 0.0});
    budget[s].terms.push_back({i, 1.0});
    budget[s].rhs = 1.0;
    const int m = in.macro.owner(n);
    if (m >= 0) {
      cross[n].terms.push_back(
          {i, in.gains.small_mue[s](m, n) * sc.p_small_max / in.macro.channel_limit(n)});
      cross[n].rhs = 1.0;
    }
  }
  for (auto& c : budget) {
    if (!c.terms.empty()) prog.linear.push_back(std::move(c));
  }

  // Interior start: half of each cell budget spread evenly, shrunk until
  // every coupled load is <= 1/2.
  pp.start = Eigen::VectorXd::Zero(prog.num_vars);
  std::vector<int> used(sc.num_cells(), 0);
  for (const auto& sl : pp.slot) ++used[sl[0]];
  for (int i = 0; i < np; ++i) pp.start[i] = 0.5 / used[pp.slot[i][0]];
  double worst = 0.0;
  for (const auto& c : cross) {
    double load = 0.0;
    for (const auto& t : c.terms) load += t.coef * pp.start[t.var];
    worst = std::max(worst, load);
  }
  if (worst > 0.5) pp.start.head(np) *= 0.5 / worst;
  for (auto& c : cross) {
    if (!c.terms.empty()) prog.linear.push_back(std::move(c));
  }

  double margin = std::numeric_limits<double>::infinity();
  for (int s = 0; s < sc.num_cells(); ++s) {
    for (int f = 0; f < sc.sues_in(s); ++f) {
      convex::RateConstraint rc;
      double rate = 0.0;
      for (int i = 0; i < np; ++i) {
        if (pp.slot[i][0] != s || pp.slot[i][1] != f) continue;
        const double a = in.gain[s](f, pp.slot[i][2]);
        rc.terms.push_back({-1, i, a, 0.0});
        rate += std::log2(1.0 + a * pp.start[i]);
      }
      if (rc.terms.empty()) continue;
      const double demand = sc.rate_sue[sc.sue_index(s, f)];
      if (max_margin) {
        rc.demand.push_back({tau, demand});
        if (demand > 0.0) margin = std::min(margin, rate / demand);
      } else {
        rc.demand_const = demand;
      }
      prog.rates.push_back(std::move(rc));
    }
  }
  if (max_margin) pp.start[tau] = std::isfinite(margin) ? 0.5 * margin : 0.0;
  return pp;
}

SmallCellAllocation pattern_allocation(const Instance& in, const PowerProgram& pp,
                                       const Eigen::VectorXd& x) {
  auto alloc = SmallCellAllocation::zeros(in.sc, AllocationMode::kExact);
  for (std::size_t i = 0; i < pp.slot.size(); ++i) {
    const auto [s, f, n] = pp.slot[i];
    alloc.cells[s].gamma(f, n) = 1.0;
    alloc.cells[s].power(f, n) = std::max(0.0, x[static_cast<Eigen::Index>(i)]) *
                                 in.sc.p_small_max;
    alloc.cells[s].admit[f] = 1.0;
  }
  return alloc;
}

// Decides whether the pattern's admitted SUEs can all meet their rates; on
// success returns the minimum-power allocation when `min_power` is set.
PatternSolution solve_pattern(const Instance& in, const Pattern& p, bool min_power) {
  PatternSolution out;
  if (p.channels == 0) {
    out.feasible = true;
    out.allocation = SmallCellAllocation::zeros(in.sc, AllocationMode::kExact);
    return out;
  }
  if (!passes_bounds(in, p)) return out;

  const auto margin = build_power_program(in, p, true);
  convex::Options opt;
  opt.use_target = true;
  opt.target = -(1.0 + kFeasTol);
  const auto res = convex::minimize(margin.program, margin.start, opt);
  const double tau = -res.objective;
  if (res.target_excluded) {
    // Certified below target; accept only if within tolerance of 1.
    if (tau + res.gap_bound < 1.0 - kFeasTol) return out;
  }
  if (!res.target_reached && tau < 1.0 - kFeasTol) return out;
  out.feasible = true;

  Eigen::VectorXd x = res.x.head(static_cast<Eigen::Index>(margin.slot.size()));
  if (min_power && res.target_reached) {
    const auto power = build_power_program(in, p, false);
    if (convex::strictly_feasible(power.program, x)) {
      const auto pr = convex::minimize(power.program, x);
      x = pr.x;
    }
  }
  out.allocation = pattern_allocation(in, margin, x);
  out.total_power = x.sum() * in.sc.p_small_max;
  return out;
}

}  // namespace

SmallCellAllocation solve_minlp_exact(const MacroAllocation& macro,
                                      const ChannelGains& gains,
                                      const Scenario& scenario, int max_binaries) {
  check_guard(scenario, max_binaries);
  const auto in = make_instance(macro, gains, scenario);
  const auto patterns = enumerate_patterns(in);
  const double eps = scenario.epsilon;

  // Group by (admitted, channels); scan groups by objective, then by fewer
  // channels, and return the lowest-power feasible pattern of the first
  // group that has one.
  std::map<std::pair<int, int>, std::vector<const Pattern*>> groups;
  for (const auto& p : patterns) groups[{p.admitted, p.channels}].push_back(&p);
  std::vector<std::pair<int, int>> order;
  for (const auto& [key, _] : groups) order.push_back(key);
  std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
    const double va = (1.0 - eps) * a.first - eps * a.second;
    const double vb = (1.0 - eps) * b.first - eps * b.second;
    if (va != vb) return va > vb;
    return a.second < b.second;
  });

  for (const auto& key : order) {
    PatternSolution best;
    for (const Pattern* p : groups[key]) {
      auto sol = solve_pattern(in, *p, true);
      if (!sol.feasible) continue;
      if (!best.feasible || sol.total_power < best.total_power) best = std::move(sol);
    }
    if (best.feasible) return best.allocation;
  }
  return SmallCellAllocation::zeros(scenario, AllocationMode::kExact);
}

int max_admissible(const MacroAllocation& macro, const ChannelGains& gains,
                   const Scenario& scenario, int max_binaries) {
  check_guard(scenario, max_binaries);
  const auto in = make_instance(macro, gains, scenario);
  auto patterns = enumerate_patterns(in);
  std::stable_sort(patterns.begin(), patterns.end(),
                   [](const Pattern& a, const Pattern& b) { return a.admitted > b.admitted; });
  for (const auto& p : patterns) {
    if (solve_pattern(in, p, false).feasible) return p.admitted;
  }
  return 0;
}

}  // namespace hetra
