#include "hetra/distributed.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

#include "cell_program.hpp"
#include "hetra/convex.hpp"
#include "hetra/csv.hpp"
#include "hetra/smallcell.hpp"

namespace hetra {

namespace {

constexpr double kMaxCondition = 1e12;
constexpr std::size_t kPoolSize = 12;
constexpr int kCombineEvery = 3;
constexpr double kMaxDepth = 0.9;

std::vector<int> active_indices(const DualState& st) {
  std::vector<int> idx;
  for (std::size_t n = 0; n < st.active.size(); ++n) {
    if (st.active[n]) idx.push_back(static_cast<int>(n));
  }
  return idx;
}

Eigen::VectorXd prices_from_center(const DualState& st) {
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(st.ellipsoid_center.size());
  for (Eigen::Index n = 0; n < eta.size(); ++n) {
    if (st.active[n]) eta[n] = st.scale[n] * std::max(0.0, st.ellipsoid_center[n]);
  }
  return eta;
}


// Best per-cell convex combination of stored subproblem solutions that
// meets every interference limit. The all-zero allocation is an implicit
// member, which keeps the combination feasible and the start interior.
SmallCellAllocation combine_iterates(const std::vector<SmallCellAllocation>& pool,
                                     const MacroAllocation& macro,
                                     const ChannelGains& gains, const Scenario& scenario) {
  const int num_s = scenario.num_cells();
  const int k = static_cast<int>(pool.size());
  const double eps = scenario.epsilon;
  convex::Program prog;
  prog.num_vars = num_s * k;
  prog.cost = Eigen::VectorXd::Zero(prog.num_vars);
  std::vector<convex::LinearConstraint> cross(scenario.num_channels);
  for (int s = 0; s < num_s; ++s) {
    convex::LinearConstraint sum{{}, 1.0};
    for (int j = 0; j < k; ++j) {
      const int v = s * k + j;
      const auto& cell = pool[j].cells[s];
      prog.cost[v] = -((1.0 - eps) * cell.admit.sum() - eps * cell.gamma.sum());
      prog.linear.push_back({{{v, -1.0}}, 0.0});
      sum.terms.push_back({v, 1.0});
      for (int n = 0; n < scenario.num_channels; ++n) {
        const int m = macro.owner(n);
        if (m < 0 || detail::channel_blocked(macro, n)) continue;
        const double load = cell.power.col(n).sum() * gains.small_mue[s](m, n);
        if (load > 0.0) cross[n].terms.push_back({v, load / macro.channel_limit(n)});
        cross[n].rhs = 1.0;
      }
    }
    prog.linear.push_back(std::move(sum));
  }
  double weight = 0.5 / k;
  for (const auto& c : cross) {
    double load = 0.0;
    for (const auto& t : c.terms) load += t.coef;
    if (load * weight > 0.5) weight = 0.5 / load;
  }
  for (auto& c : cross) {
    if (!c.terms.empty()) prog.linear.push_back(std::move(c));
  }
  convex::Options opt;
  opt.gap_tol = 1e-7;
  const auto res =
      convex::minimize(prog, Eigen::VectorXd::Constant(prog.num_vars, weight), opt);

  auto out = SmallCellAllocation::zeros(scenario, AllocationMode::kRelaxed);
  for (int s = 0; s < num_s; ++s) {
    for (int j = 0; j < k; ++j) {
      const double w = std::max(0.0, res.x[s * k + j]);
      out.cells[s].gamma += w * pool[j].cells[s].gamma;
      out.cells[s].power += w * pool[j].cells[s].power;
      out.cells[s].admit += w * pool[j].cells[s].admit;
    }
  }
  return out;
}

}  // namespace

int DualState::num_active() const {
  return static_cast<int>(std::count(active.begin(), active.end(), true));
}

DualState initial_dual_state(const MacroAllocation& macro, const Scenario& scenario) {
  const int num_n = scenario.num_channels;
  DualState st;
  st.active.assign(num_n, false);
  st.scale = Eigen::VectorXd::Zero(num_n);
  st.ellipsoid_center = Eigen::VectorXd::Zero(num_n);
  st.ellipsoid_shape = Eigen::MatrixXd::Identity(num_n, num_n);
  const double bound = (1.0 - scenario.epsilon) * std::max(1, scenario.num_sues());
  for (int n = 0; n < num_n; ++n) {
    if (macro.owner(n) < 0 || detail::channel_blocked(macro, n)) continue;
    st.active[n] = true;
    st.scale[n] = bound / macro.channel_limit(n);
    st.ellipsoid_center[n] = 1.0;
  }
  const int k = st.num_active();
  for (int n = 0; n < num_n; ++n) {
    if (st.active[n]) st.ellipsoid_shape(n, n) = k;
  }
  st.eta = prices_from_center(st);
  st.best_upper = std::numeric_limits<double>::infinity();
  st.best_lower = -std::numeric_limits<double>::infinity();
  return st;
}

double lagrangian_value(const SmallCellAllocation& alloc, const MacroAllocation& macro,
                        const ChannelGains& gains, const Scenario& scenario,
                        const Eigen::VectorXd& eta) {
  double value = objective_value(alloc, scenario.epsilon);
  for (int n = 0; n < scenario.num_channels; ++n) {
    if (macro.owner(n) < 0 || eta[n] == 0.0) continue;
    value += eta[n] * (macro.channel_limit(n) - cross_tier_interference(alloc, macro, gains, n));
  }
  return value;
}

SubproblemResult solve_subproblem(int s, const MacroAllocation& macro,
                                  const ChannelGains& gains, const Scenario& scenario,
                                  const Eigen::VectorXd& eta, double gap_tol) {
  if ((eta.array() < 0.0).any()) {
    throw std::invalid_argument("solve_subproblem: negative price");
  }
  detail::CellProgramSpec spec;
  spec.cells = {s};
  spec.cross_tier = false;
  spec.prices = &eta;
  const auto cp = detail::build_cell_program(scenario, gains, macro, spec);
  convex::Options opt;
  opt.gap_tol = gap_tol;
  const auto res = convex::minimize(cp.program, cp.start, opt);

  auto alloc = SmallCellAllocation::zeros(scenario, AllocationMode::kRelaxed);
  cp.extract(res.x, scenario, alloc);
  SubproblemResult out;
  out.cell = alloc.cells[s];
  out.value = -res.objective;
  out.gap_bound = res.gap_bound;
  out.converged = res.converged;
  out.message = res.message;
  return out;
}

DualEvaluation evaluate_dual(const MacroAllocation& macro, const ChannelGains& gains,
                             const Scenario& scenario, const Eigen::VectorXd& eta,
                             double gap_tol, bool parallel) {
  const int num_s = scenario.num_cells();
  std::vector<SubproblemResult> parts(num_s);
  if (parallel && num_s > 1) {
    std::vector<std::future<SubproblemResult>> jobs;
    for (int s = 0; s < num_s; ++s) {
      jobs.push_back(std::async(std::launch::async, [&, s] {
        return solve_subproblem(s, macro, gains, scenario, eta, gap_tol);
      }));
    }
    for (int s = 0; s < num_s; ++s) parts[s] = jobs[s].get();
  } else {
    for (int s = 0; s < num_s; ++s) {
      parts[s] = solve_subproblem(s, macro, gains, scenario, eta, gap_tol);
    }
  }

  DualEvaluation ev;
  ev.allocation = SmallCellAllocation::zeros(scenario, AllocationMode::kRelaxed);
  for (int s = 0; s < num_s; ++s) {
    ev.allocation.cells[s] = parts[s].cell;
    ev.value += parts[s].value;
    ev.gap_bound += parts[s].gap_bound;
    ev.converged = ev.converged && parts[s].converged;
  }
  for (int n = 0; n < scenario.num_channels; ++n) {
    if (macro.owner(n) >= 0 && eta[n] != 0.0) ev.value += eta[n] * macro.channel_limit(n);
  }
  return ev;
}

double dual_function(const MacroAllocation& macro, const ChannelGains& gains,
                     const Scenario& scenario, const Eigen::VectorXd& eta) {
  return evaluate_dual(macro, gains, scenario, eta).value;
}

Eigen::VectorXd subgradient(const SmallCellAllocation& alloc_at_eta,
                            const MacroAllocation& macro, const ChannelGains& gains,
                            const Scenario& scenario) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(scenario.num_channels);
  for (int n = 0; n < scenario.num_channels; ++n) {
    if (macro.owner(n) < 0) continue;
    d[n] = macro.channel_limit(n) - cross_tier_interference(alloc_at_eta, macro, gains, n);
  }
  return d;
}

StepResult ellipsoid_step(const DualState& state, const Eigen::VectorXd& d, double depth) {
  StepResult out{state, StepStatus::kOk};
  const auto idx = active_indices(state);
  const int k = static_cast<int>(idx.size());
  if (k == 0) {
    out.status = StepStatus::kZeroSubgradient;
    return out;
  }

  Eigen::VectorXd c(k);
  Eigen::MatrixXd a(k, k);
  for (int i = 0; i < k; ++i) {
    c[i] = state.ellipsoid_center[idx[i]];
    for (int j = 0; j < k; ++j) a(i, j) = state.ellipsoid_shape(idx[i], idx[j]);
  }

  // Cut direction: most negative coordinate if the center leaves the
  // orthant, otherwise the subgradient in normalized coordinates.
  Eigen::VectorXd g = Eigen::VectorXd::Zero(k);
  int worst = -1;
  double h = std::max(0.0, depth);
  for (int i = 0; i < k; ++i) {
    if (c[i] < 0.0 && (worst < 0 || c[i] < c[worst])) worst = i;
  }
  if (worst >= 0) {
    g[worst] = -1.0;
    h = -c[worst];
  } else {
    for (int i = 0; i < k; ++i) g[i] = d[idx[i]] * state.scale[idx[i]];
  }
  const double quad = g.dot(a * g);
  if (!(quad > 0.0) || !std::isfinite(quad)) {
    out.status = StepStatus::kZeroSubgradient;
    return out;
  }
  const Eigen::VectorXd ag = a * g / std::sqrt(quad);
  const double alpha = std::min(kMaxDepth, h / std::sqrt(quad));

  Eigen::VectorXd c_new = c - (1.0 + k * alpha) / (k + 1.0) * ag;
  Eigen::MatrixXd a_new;
  if (k == 1) {
    a_new = a * (1.0 - alpha) * (1.0 - alpha) / 4.0;
  } else {
    const double kk = static_cast<double>(k) * k;
    a_new = kk * (1.0 - alpha * alpha) / (kk - 1.0) *
            (a - 2.0 * (1.0 + k * alpha) / ((k + 1.0) * (1.0 + alpha)) * ag * ag.transpose());
  }
  a_new = 0.5 * (a_new + a_new.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a_new, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxCondition) {
    out.status = StepStatus::kDegenerate;
    return out;
  }

  for (int i = 0; i < k; ++i) {
    out.state.ellipsoid_center[idx[i]] = c_new[i];
    for (int j = 0; j < k; ++j) out.state.ellipsoid_shape(idx[i], idx[j]) = a_new(i, j);
  }
  out.state.eta = prices_from_center(out.state);
  out.state.iteration = state.iteration + 1;
  return out;
}

SmallCellAllocation recover_feasible(const SmallCellAllocation& alloc,
                                     const MacroAllocation& macro,
                                     const ChannelGains& gains, const Scenario& scenario,
                                     RecoveryMode mode) {
  SmallCellAllocation out = alloc;
  out.mode = AllocationMode::kRelaxed;
  for (int n = 0; n < scenario.num_channels; ++n) {
    if (macro.owner(n) < 0) continue;
    const double limit = macro.channel_limit(n);
    const double load = cross_tier_interference(alloc, macro, gains, n);
    if (!(load > limit)) continue;
    const double alpha = load / limit;
    for (auto& cell : out.cells) {
      for (int f = 0; f < cell.power.rows(); ++f) {
        cell.power(f, n) = limit > 0.0 ? cell.power(f, n) / alpha : 0.0;
      }
    }
  }

  if (mode == RecoveryMode::kReoptimize) {
    detail::CellProgramSpec spec;
    for (int s = 0; s < scenario.num_cells(); ++s) spec.cells.push_back(s);
    spec.cross_tier = false;
    spec.fixed_powers = &out;
    const auto cp = detail::build_cell_program(scenario, gains, macro, spec);
    const auto res = convex::minimize(cp.program, cp.start);
    SmallCellAllocation re = SmallCellAllocation::zeros(scenario, AllocationMode::kRelaxed);
    cp.extract(res.x, scenario, re);
    // Keep whichever of the two recoveries scores higher.
    SmallCellAllocation plain = recover_feasible(out, macro, gains, scenario,
                                                 RecoveryMode::kRescale);
    return objective_value(re, scenario.epsilon) >= objective_value(plain, scenario.epsilon)
               ? re
               : plain;
  }

  for (int s = 0; s < scenario.num_cells(); ++s) {
    for (int f = 0; f < scenario.sues_in(s); ++f) {
      const double demand = scenario.rate_sue[scenario.sue_index(s, f)];
      const double rate = sue_rate(out, macro, gains, scenario, s, f);
      out.cells[s].admit[f] = demand > 0.0 ? std::min(1.0, rate / demand) : 1.0;
    }
  }
  return out;
}

DistributedResult run_algorithm2(const MacroAllocation& macro, const ChannelGains& gains,
                                 const Scenario& scenario,
                                 const DistributedOptions& options) {
  if (options.l_max < 1) throw std::invalid_argument("run_algorithm2: l_max < 1");
  DistributedResult out;
  DualState st = initial_dual_state(macro, scenario);
  out.allocation = SmallCellAllocation::zeros(scenario, AllocationMode::kRelaxed);
  st.best_lower = 0.0;  // the all-zero allocation is feasible
  out.status = "iteration limit";
  std::vector<SmallCellAllocation> history;

  for (int l = 1; l <= options.l_max; ++l) {
    st.iteration = l;
    // The first iteration probes the price-free point: when the unpriced
    // solution already meets every limit it closes the gap at once.
    const Eigen::VectorXd eta =
        l == 1 ? Eigen::VectorXd::Zero(scenario.num_channels) : st.eta;
    const auto ev = evaluate_dual(macro, gains, scenario, eta,
                                  options.subproblem_gap_tol, options.parallel);
    const double upper = ev.value + ev.gap_bound;
    st.best_upper = std::min(st.best_upper, upper);

    const Eigen::VectorXd d = subgradient(ev.allocation, macro, gains, scenario);
    double max_ratio = 0.0;
    for (int n = 0; n < scenario.num_channels; ++n) {
      if (macro.owner(n) < 0) continue;
      const double limit = macro.channel_limit(n);
      const double load = limit - d[n];
      if (limit > 0.0) max_ratio = std::max(max_ratio, load / limit);
    }

    // Candidates: this iterate and the best feasible combination of the
    // recent iterates.
    history.push_back(ev.allocation);
    if (history.size() > kPoolSize) history.erase(history.begin());
    std::vector<SmallCellAllocation> candidates{ev.allocation};
    if (l % kCombineEvery == 0 || l == options.l_max) {
      candidates.push_back(combine_iterates(history, macro, gains, scenario));
    }
    double lower = -std::numeric_limits<double>::infinity();
    for (const auto& cand : candidates) {
      auto recovered = recover_feasible(cand, macro, gains, scenario, options.recovery);
      const double value = objective_value(recovered, scenario.epsilon);
      lower = std::max(lower, value);
      if (value > st.best_lower) {
        st.best_lower = value;
        out.allocation = std::move(recovered);
      }
    }

    TraceRow row;
    row.iteration = l;
    row.dual_upper = st.best_upper;
    row.primal_lower = st.best_lower;
    row.gap = (st.best_upper - st.best_lower) / std::max(1.0, std::abs(st.best_upper));
    row.max_violation_ratio = max_ratio;
    row.dual_value = upper;
    row.primal_value = lower;
    out.trace.push_back(row);

    if (row.gap <= options.gap_tol) {
      out.converged = true;
      out.status = "gap tolerance reached";
      break;
    }
    if (l == 1) continue;
    const auto step = ellipsoid_step(st, d, std::max(0.0, ev.value - st.best_upper));
    if (step.status == StepStatus::kZeroSubgradient) {
      out.status = "zero subgradient";
      break;
    }
    if (step.status == StepStatus::kDegenerate) {
      out.status = "degenerate ellipsoid";
      break;
    }
    const double upper_keep = st.best_upper;
    const double lower_keep = st.best_lower;
    st = step.state;
    st.best_upper = upper_keep;
    st.best_lower = lower_keep;
  }
  out.objective = st.best_lower;
  out.state = st;
  return out;
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::ostringstream os;
  os << "iteration,dual_upper,primal_lower,gap,max_violation_ratio\n";
  for (const auto& r : trace) {
    os << r.iteration << ',' << csv::number(r.dual_upper) << ','
       << csv::number(r.primal_lower) << ',' << csv::number(r.gap) << ','
       << csv::number(r.max_violation_ratio) << '\n';
  }
  return os.str();
}

}  // namespace hetra
