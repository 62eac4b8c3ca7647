#include "cell_program.hpp"

#include <algorithm>
#include <cmath>

namespace hetra::detail {

bool channel_blocked(const MacroAllocation& macro, int n) {
  return macro.owner(n) >= 0 && !(macro.channel_limit(n) > 0.0);
}

double sue_gain_ratio(const MacroAllocation& macro, const ChannelGains& gains,
                      const Scenario& scenario, int s, int f, int n) {
  const double ib = macro_interference_at_sue(macro, gains, scenario.sue_index(s, f), n);
  return gains.small_sue[s](f, n) / (ib + scenario.noise);
}

CellProgram build_cell_program(const Scenario& scenario, const ChannelGains& gains,
                               const MacroAllocation& macro,
                               const CellProgramSpec& spec) {
  const int num_n = scenario.num_channels;
  const double ps = scenario.p_small_max;
  const bool fixed = spec.fixed_powers != nullptr;
  CellProgram cp;
  int nv = 0;

  for (int s : spec.cells) {
    for (int f = 0; f < scenario.sues_in(s); ++f) {
      bool any = false;
      for (int n = 0; n < num_n; ++n) {
        if (channel_blocked(macro, n)) continue;
        CellSlot slot{s, f, n};
        if (fixed) {
          const double p = spec.fixed_powers->cells[s].power(f, n);
          if (!(p > 0.0)) continue;
          slot.fixed_power = p / ps;
          slot.share = nv++;
        } else {
          slot.share = nv++;
          slot.power = nv++;
        }
        cp.slots.push_back(slot);
        any = true;
      }
      cp.admits.push_back({s, f, any ? nv++ : -1});
    }
  }

  auto& prog = cp.program;
  prog.num_vars = nv;
  prog.cost = Eigen::VectorXd::Zero(nv);
  cp.start = Eigen::VectorXd::Zero(nv);
  const double eps = scenario.epsilon;

  for (const auto& a : cp.admits) {
    if (a.var < 0) continue;
    prog.cost[a.var] = -(1.0 - eps);
    prog.linear.push_back({{{a.var, -1.0}}, 0.0});
    prog.linear.push_back({{{a.var, 1.0}}, 1.0});
  }

  // Share variables: cost, sign, and per-(s, n) sum.
  std::vector<std::vector<convex::LinearConstraint>> share_sum(
      scenario.num_cells(), std::vector<convex::LinearConstraint>(num_n));
  for (const auto& sl : cp.slots) {
    prog.cost[sl.share] = eps;
    prog.linear.push_back({{{sl.share, -1.0}}, 0.0});
    share_sum[sl.s][sl.n].terms.push_back({sl.share, 1.0});
    share_sum[sl.s][sl.n].rhs = 1.0;
  }
  for (int s : spec.cells) {
    for (int n = 0; n < num_n; ++n) {
      if (!share_sum[s][n].terms.empty()) prog.linear.push_back(share_sum[s][n]);
    }
  }

  if (!fixed) {
    std::vector<convex::LinearConstraint> budget(scenario.num_cells());
    std::vector<convex::LinearConstraint> cross(num_n);
    for (const auto& sl : cp.slots) {
      prog.linear.push_back({{{sl.power, -1.0}}, 0.0});
      budget[sl.s].terms.push_back({sl.power, 1.0});
      budget[sl.s].rhs = 1.0;
      const int m = macro.owner(sl.n);
      if (m < 0) continue;
      const double coupling = gains.small_mue[sl.s](m, sl.n) * ps;
      if (spec.prices != nullptr) prog.cost[sl.power] += (*spec.prices)[sl.n] * coupling;
      if (spec.cross_tier) {
        cross[sl.n].terms.push_back({sl.power, coupling / macro.channel_limit(sl.n)});
        cross[sl.n].rhs = 1.0;
      }
    }
    for (int s : spec.cells) {
      if (!budget[s].terms.empty()) prog.linear.push_back(budget[s]);
    }

    // Uniform interior powers, shrunk until every coupled load is <= 1/2.
    std::vector<int> active(scenario.num_cells(), 0);
    for (const auto& sl : cp.slots) ++active[sl.s];
    for (const auto& sl : cp.slots) cp.start[sl.power] = 0.5 / active[sl.s];
    double worst = 0.0;
    for (const auto& c : cross) {
      if (c.terms.empty()) continue;
      double load = 0.0;
      for (const auto& t : c.terms) load += t.coef * cp.start[t.var];
      worst = std::max(worst, load);
    }
    if (worst > 0.5) {
      for (const auto& sl : cp.slots) cp.start[sl.power] *= 0.5 / worst;
    }
    for (const auto& c : cross) {
      if (!c.terms.empty()) prog.linear.push_back(c);
    }
  }

  for (const auto& sl : cp.slots) {
    cp.start[sl.share] = 0.9 / scenario.sues_in(sl.s);
  }

  // Rate constraints; the admission value starts at half the rate ratio.
  std::size_t k = 0;
  for (const auto& a : cp.admits) {
    convex::RateConstraint rc;
    double rate = 0.0;
    for (; k < cp.slots.size() && cp.slots[k].s == a.s && cp.slots[k].f == a.f; ++k) {
      const auto& sl = cp.slots[k];
      convex::RateTerm t;
      t.share = sl.share;
      t.power = sl.power;
      t.fixed_power = sl.fixed_power;
      t.gain = sue_gain_ratio(macro, gains, scenario, sl.s, sl.f, sl.n) * ps;
      rc.terms.push_back(t);
      const double p = fixed ? sl.fixed_power : cp.start[sl.power];
      rate += convex::perspective_log2(cp.start[sl.share], p, t.gain);
    }
    if (a.var < 0) continue;
    const double demand = scenario.rate_sue[scenario.sue_index(a.s, a.f)];
    rc.demand.push_back({a.var, demand});
    prog.rates.push_back(std::move(rc));
    cp.start[a.var] = demand > 0.0 ? 0.5 * std::min(1.0, rate / demand) : 0.5;
  }
  return cp;
}

void CellProgram::extract(const Eigen::VectorXd& x, const Scenario& scenario,
                          SmallCellAllocation& out) const {
  const double ps = scenario.p_small_max;
  for (const auto& a : admits) {
    auto& cell = out.cells[a.s];
    cell.gamma.row(a.f).setZero();
    cell.power.row(a.f).setZero();
    cell.admit[a.f] = a.var < 0 ? 0.0 : std::clamp(x[a.var], 0.0, 1.0);
  }
  for (const auto& sl : slots) {
    auto& cell = out.cells[sl.s];
    cell.gamma(sl.f, sl.n) = std::clamp(x[sl.share], 0.0, 1.0);
    const double p = sl.power < 0 ? sl.fixed_power : std::max(0.0, x[sl.power]);
    cell.power(sl.f, sl.n) = p * ps;
  }
}

}  // namespace hetra::detail
