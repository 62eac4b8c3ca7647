#include "hetra/macro.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hetra/assignment.hpp"

namespace hetra {

double tolerable_interference(double power, double gain, double rate,
                              double noise, double i_max) {
  if (!(power > 0) || !(gain > 0) || !(rate > 0)) {
    throw std::invalid_argument("tolerable_interference needs P, g, R > 0");
  }
  const double value = power * gain / (std::exp2(rate) - 1.0) - noise;
  if (value < 0.0) {
    // Rounding at exactly zero margin is not an infeasibility.
    if (value >= -1e-12 * noise) return 0.0;
    throw InfeasibleError("MUE cannot meet its rate on this sub-channel even "
                          "without interference");
  }
  return std::min(value, i_max);
}

MacroAllocation solve_proposed(const ChannelGains& gains, const Scenario& scenario) {
  const int m_count = scenario.num_mues();
  const int n_count = scenario.num_channels;
  if (m_count > n_count) {
    throw std::invalid_argument("proposed macro scheme needs M <= N");
  }
  MacroAllocation alloc = MacroAllocation::empty(scenario);
  if (m_count == 0) return alloc;

  const Assignment assignment = solve_assignment(gains.macro_mue);
  const double power = scenario.p_macro_max / m_count;
  for (int m = 0; m < m_count; ++m) {
    const int n = assignment.column_of[m];
    alloc.gamma(m, n) = 1;
    alloc.power(m, n) = power;
    alloc.tolerable(m, n) = tolerable_interference(
        power, gains.macro_mue(m, n), scenario.rate_mue[m], scenario.noise,
        scenario.i_max);
  }
  alloc.n_ac = m_count;
  return alloc;
}

InterferenceOptimum brute_force_max_interference(const ChannelGains& gains,
                                                 const Scenario& scenario,
                                                 int max_channels_per_mue) {
  const int m_count = scenario.num_mues();
  const int n_count = scenario.num_channels;
  if (m_count > 4 || n_count > 8) {
    throw SizeLimitError("brute_force_max_interference is limited to M <= 4, N <= 8");
  }
  if (m_count == 0 || m_count > n_count) {
    throw std::invalid_argument("brute_force_max_interference needs 1 <= M <= N");
  }
  const int cap = std::max(1, max_channels_per_mue);
  const double power = scenario.p_macro_max / m_count;

  // Per-(m, n) finite level if n is m's rate-carrying channel; NaN when the
  // rate cannot be met there.
  Eigen::MatrixXd level(m_count, n_count);
  for (int m = 0; m < m_count; ++m) {
    for (int n = 0; n < n_count; ++n) {
      try {
        level(m, n) = tolerable_interference(power, gains.macro_mue(m, n),
                                             scenario.rate_mue[m], scenario.noise,
                                             scenario.i_max);
      } catch (const InfeasibleError&) {
        level(m, n) = std::numeric_limits<double>::quiet_NaN();
      }
    }
  }

  // state 0: unused; 1..M: rate-carrying for MUE s-1; M+1..2M: owned at i_max.
  const int radix = 2 * m_count + 1;
  std::vector<int> state(n_count, 0);
  std::vector<int> tight_channel(m_count), tight_count(m_count), owned(m_count);

  bool found = false;
  int best_unc = -1;
  double best_sum = -std::numeric_limits<double>::infinity();
  std::vector<int> best_tight;

  while (true) {
    std::fill(tight_count.begin(), tight_count.end(), 0);
    std::fill(owned.begin(), owned.end(), 0);
    int unc = 0;
    for (int n = 0; n < n_count; ++n) {
      const int st = state[n];
      if (st == 0) continue;
      const int m = (st - 1) % m_count;
      ++owned[m];
      if (st <= m_count) {
        ++tight_count[m];
        tight_channel[m] = n;
      } else {
        ++unc;
      }
    }
    bool admissible = true;
    for (int m = 0; m < m_count && admissible; ++m) {
      // Configurations with several finite channels for one MUE have fewer
      // i_max entries than the one obtained by lifting all but one of them
      // to i_max, so they never win the lexicographic comparison.
      admissible = tight_count[m] == 1 && owned[m] <= cap;
    }
    if (admissible && unc >= best_unc) {
      double sum = 0.0;
      bool feasible = true;
      for (int m = 0; m < m_count; ++m) {
        const double v = level(m, tight_channel[m]);
        if (std::isnan(v)) {
          feasible = false;
          break;
        }
        sum += v;
      }
      if (feasible && (unc > best_unc || sum > best_sum)) {
        found = true;
        best_unc = unc;
        best_sum = sum;
        best_tight = tight_channel;
      }
    }
    int pos = 0;
    while (pos < n_count && ++state[pos] == radix) state[pos++] = 0;
    if (pos == n_count) break;
  }

  if (!found) {
    throw InfeasibleError("no configuration lets every MUE meet its rate on one "
                          "sub-channel");
  }
  InterferenceOptimum out;
  out.unconstrained_channels = best_unc;
  out.finite_sum = best_sum;
  out.allocation = MacroAllocation::empty(scenario);
  for (int m = 0; m < m_count; ++m) {
    const int n = best_tight[m];
    out.allocation.gamma(m, n) = 1;
    out.allocation.power(m, n) = power;
    out.allocation.tolerable(m, n) = level(m, n);
  }
  out.allocation.n_ac = m_count;
  return out;
}

namespace detail {

std::vector<double> water_fill_min_power(const std::vector<double>& q, double rate) {
  const int k_total = static_cast<int>(q.size());
  std::vector<double> power(q.size(), 0.0);
  if (k_total == 0) {
    throw InfeasibleError("water-filling over an empty channel set");
  }
  std::vector<int> order(q.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return q[a] > q[b]; });
  double log_sum = 0.0;
  for (int k = 1; k <= k_total; ++k) {
    log_sum += std::log(q[order[k - 1]]);
    // Water level w with prod_{i<=k} (w q_i) = 2^R.
    const double log_w = (rate * std::log(2.0) - log_sum) / k;
    const double w = std::exp(log_w);
    const bool next_inactive = k == k_total || w <= 1.0 / q[order[k]];
    if (next_inactive) {
      for (int i = 0; i < k; ++i) {
        power[order[i]] = std::max(0.0, w - 1.0 / q[order[i]]);
      }
      return power;
    }
  }
  return power;
}

double water_fill_max_rate(const std::vector<double>& q, double budget) {
  const int k_total = static_cast<int>(q.size());
  if (k_total == 0 || budget <= 0) return 0.0;
  std::vector<double> sorted = q;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double inv_sum = 0.0;
  for (int k = 1; k <= k_total; ++k) {
    inv_sum += 1.0 / sorted[k - 1];
    const double w = (budget + inv_sum) / k;
    if (k == k_total || w <= 1.0 / sorted[k]) {
      double rate = 0.0;
      for (int i = 0; i < k; ++i) rate += std::log2(std::max(1.0, w * sorted[i]));
      return rate;
    }
  }
  return 0.0;
}

}  // namespace detail

namespace {

// Per-tone dual value of giving tone n to an MUE with water level mu.
double tone_value(double mu, double q) {
  const double x = mu * q;
  if (x <= 1.0) return 0.0;
  return mu * std::log(x) - mu + 1.0 / q;
}

class TraditionalDual {
 public:
  TraditionalDual(Eigen::MatrixXd q, std::vector<double> rates)
      : q_(std::move(q)), rates_(std::move(rates)), mu_(q_.rows(), 0.0) {}

  std::vector<int> owners() const {
    std::vector<int> owner(q_.cols(), -1);
    for (int n = 0; n < q_.cols(); ++n) {
      double best = 0.0;
      for (int m = 0; m < q_.rows(); ++m) {
        const double v = tone_value(mu_[m], q_(m, n));
        if (v > best) {
          best = v;
          owner[n] = m;
        }
      }
    }
    return owner;
  }

  double rate(int m) const {
    const auto owner = owners();
    double r = 0.0;
    for (int n = 0; n < q_.cols(); ++n) {
      if (owner[n] == m) r += std::log2(std::max(1.0, mu_[m] * q_(m, n)));
    }
    return r;
  }

  // Smallest mu_m (to bisection precision) whose rate reaches R_m.
  void fit(int m) {
    const double target = rates_[m];
    double hi = std::max(mu_[m], 1.0 / q_.row(m).maxCoeff());
    mu_[m] = hi;
    int guard = 0;
    while (rate(m) < target && guard++ < 2000) {
      hi *= 2.0;
      mu_[m] = hi;
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      mu_[m] = mid;
      if (rate(m) >= target) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    mu_[m] = hi;
  }

  void solve(int max_rounds = 200, double tol = 1e-6) {
    const int m_count = static_cast<int>(q_.rows());
    for (int m = 0; m < m_count; ++m) fit(m);
    for (int round = 0; round < max_rounds; ++round) {
      bool changed = false;
      for (int m = 0; m < m_count; ++m) {
        const double r = rate(m);
        if (std::abs(r - rates_[m]) <= tol * rates_[m]) continue;
        const double before = mu_[m];
        fit(m);
        if (std::abs(mu_[m] - before) > 1e-12 * before) changed = true;
      }
      if (!changed) break;
    }
  }

 private:
  Eigen::MatrixXd q_;
  std::vector<double> rates_;
  std::vector<double> mu_;
};

// Minimum total power (in units of sigma) for a given tone split; infinite when
// some MUE holds no tone.
double split_power(const Eigen::MatrixXd& q, const std::vector<double>& rates,
                   const std::vector<int>& owner) {
  double total = 0.0;
  for (int m = 0; m < q.rows(); ++m) {
    std::vector<double> qm;
    for (int n = 0; n < q.cols(); ++n) {
      if (owner[n] == m) qm.push_back(q(m, n));
    }
    if (qm.empty()) return std::numeric_limits<double>::infinity();
    for (double p : detail::water_fill_min_power(qm, rates[m])) total += p;
  }
  return total;
}

// Single-tone reassignments and pairwise swaps until no move lowers the power.
void improve_split(const Eigen::MatrixXd& q, const std::vector<double>& rates,
                   std::vector<int>& owner) {
  const int m_count = static_cast<int>(q.rows());
  const int n_count = static_cast<int>(q.cols());
  double best = split_power(q, rates, owner);
  for (int pass = 0; pass < 100; ++pass) {
    bool moved = false;
    for (int n = 0; n < n_count; ++n) {
      for (int m = -1; m < m_count; ++m) {
        if (m == owner[n]) continue;
        const int keep = owner[n];
        owner[n] = m;
        const double p = split_power(q, rates, owner);
        if (p < best * (1.0 - 1e-12)) {
          best = p;
          moved = true;
        } else {
          owner[n] = keep;
        }
      }
    }
    for (int a = 0; a < n_count; ++a) {
      for (int b = a + 1; b < n_count; ++b) {
        if (owner[a] == owner[b]) continue;
        std::swap(owner[a], owner[b]);
        const double p = split_power(q, rates, owner);
        if (p < best * (1.0 - 1e-12)) {
          best = p;
          moved = true;
        } else {
          std::swap(owner[a], owner[b]);
        }
      }
    }
    if (!moved) break;
  }
}

}  // namespace

MacroAllocation solve_traditional(const ChannelGains& gains, const Scenario& scenario,
                                  double i_th) {
  if (!(i_th >= 0)) throw std::invalid_argument("I_th must be non-negative");
  const int m_count = scenario.num_mues();
  const int n_count = scenario.num_channels;
  MacroAllocation alloc = MacroAllocation::empty(scenario);
  if (m_count == 0) return alloc;

  const double sigma = i_th + scenario.noise;
  const double cap = 10.0 * scenario.p_macro_max;
  for (int m = 0; m < m_count; ++m) {
    std::vector<double> q(n_count);
    for (int n = 0; n < n_count; ++n) q[n] = gains.macro_mue(m, n) / sigma;
    if (detail::water_fill_max_rate(q, cap) < scenario.rate_mue[m]) {
      throw InfeasibleError("MUE " + std::to_string(m) +
                            " cannot reach its rate even on all sub-channels");
    }
  }

  // Work in units of sigma: the channel split does not depend on I_th and the
  // powers scale linearly with I_th + N_o.
  Eigen::MatrixXd q = gains.macro_mue / scenario.noise;
  TraditionalDual dual(q, scenario.rate_mue);
  dual.solve();
  std::vector<int> owner = dual.owners();

  // An MUE left without tones takes its best free tone, then its best tone.
  for (int m = 0; m < m_count; ++m) {
    if (std::find(owner.begin(), owner.end(), m) != owner.end()) continue;
    int pick = -1;
    for (int n = 0; n < n_count; ++n) {
      if (owner[n] == -1 && (pick < 0 || q(m, n) > q(m, pick))) pick = n;
    }
    if (pick < 0) {
      std::vector<int> held(m_count, 0);
      for (int o : owner) {
        if (o >= 0) ++held[o];
      }
      for (int n = 0; n < n_count; ++n) {
        if (held[owner[n]] >= 2 && (pick < 0 || q(m, n) > q(m, pick))) pick = n;
      }
    }
    if (pick < 0) {
      throw InfeasibleError("dual channel split left MUE " + std::to_string(m) +
                            " without a sub-channel");
    }
    owner[pick] = m;
  }
  improve_split(q, scenario.rate_mue, owner);

  for (int m = 0; m < m_count; ++m) {
    std::vector<int> channels;
    std::vector<double> qm;
    for (int n = 0; n < n_count; ++n) {
      if (owner[n] == m) {
        channels.push_back(n);
        qm.push_back(gains.macro_mue(m, n) / sigma);
      }
    }
    const auto power = detail::water_fill_min_power(qm, scenario.rate_mue[m]);
    for (std::size_t k = 0; k < channels.size(); ++k) {
      if (power[k] <= 0.0) continue;
      const int n = channels[k];
      alloc.gamma(m, n) = 1;
      alloc.power(m, n) = power[k];
      alloc.tolerable(m, n) = std::min(i_th, scenario.i_max);
      ++alloc.n_ac;
    }
  }
  return alloc;
}

MacroAllocation brute_force_traditional(const ChannelGains& gains,
                                        const Scenario& scenario, double i_th) {
  const int m_count = scenario.num_mues();
  const int n_count = scenario.num_channels;
  if (std::pow(m_count + 1.0, n_count) > 2e6) {
    throw SizeLimitError("brute_force_traditional is limited to (M+1)^N <= 2e6");
  }
  const double sigma = i_th + scenario.noise;
  std::vector<int> owner(n_count, -1);
  double best_total = std::numeric_limits<double>::infinity();
  std::vector<int> best_owner;
  std::vector<std::vector<double>> best_power;

  while (true) {
    std::vector<std::vector<int>> sets(m_count);
    for (int n = 0; n < n_count; ++n) {
      if (owner[n] >= 0) sets[owner[n]].push_back(n);
    }
    bool ok = true;
    for (const auto& s : sets) ok = ok && !s.empty();
    if (ok) {
      double total = 0.0;
      std::vector<std::vector<double>> powers(m_count);
      for (int m = 0; m < m_count; ++m) {
        std::vector<double> qm;
        for (int n : sets[m]) qm.push_back(gains.macro_mue(m, n) / sigma);
        powers[m] = detail::water_fill_min_power(qm, scenario.rate_mue[m]);
        for (double p : powers[m]) total += p;
      }
      if (total < best_total) {
        best_total = total;
        best_owner = owner;
        best_power = powers;
      }
    }
    int pos = 0;
    while (pos < n_count && ++owner[pos] == m_count) owner[pos++] = -1;
    if (pos == n_count) break;
  }

  MacroAllocation alloc = MacroAllocation::empty(scenario);
  if (best_owner.empty()) return alloc;
  std::vector<int> cursor(m_count, 0);
  for (int n = 0; n < n_count; ++n) {
    const int m = best_owner[n];
    if (m < 0) continue;
    const double p = best_power[m][cursor[m]++];
    if (p <= 0.0) continue;
    alloc.gamma(m, n) = 1;
    alloc.power(m, n) = p;
    alloc.tolerable(m, n) = std::min(i_th, scenario.i_max);
    ++alloc.n_ac;
  }
  return alloc;
}

BisectionResult bisect_ith(const ChannelGains& gains, const Scenario& scenario,
                           double i_th_lo, double i_th_hi, double delta) {
  if (!(i_th_lo >= 0) || !(i_th_hi > i_th_lo) || !(delta > 0)) {
    throw std::invalid_argument("bisect_ith needs 0 <= lo < hi and delta > 0");
  }
  const double target = scenario.p_macro_max;
  BisectionResult out;
  // An I_th at which some MUE cannot reach its rate counts as over budget.
  auto solve_at = [&](double i_th) {
    try {
      return solve_traditional(gains, scenario, i_th);
    } catch (const InfeasibleError&) {
      return MacroAllocation{};
    }
  };
  auto total = [](const MacroAllocation& a) {
    return a.gamma.size() == 0 ? std::numeric_limits<double>::infinity() : a.total_power();
  };

  MacroAllocation at_lo = solve_traditional(gains, scenario, i_th_lo);
  if (at_lo.total_power() > target + delta) {
    throw InfeasibleError("bisect_ith: total power already exceeds P_B_max at the "
                          "lower end of the bracket");
  }
  if (scenario.num_mues() == 0) {
    out.i_th = i_th_lo;
    out.allocation = std::move(at_lo);
    return out;
  }
  MacroAllocation at_hi = solve_at(i_th_hi);
  while (total(at_hi) < target - delta) {
    if (out.bracket_doublings == 20) {
      throw InfeasibleError("bisect_ith: no bracket found after 20 doublings");
    }
    i_th_lo = i_th_hi;
    i_th_hi *= 2.0;
    ++out.bracket_doublings;
    at_hi = solve_at(i_th_hi);
  }

  double lo = i_th_lo;
  double hi = i_th_hi;
  double mid = 0.5 * (lo + hi);
  MacroAllocation alloc = solve_at(mid);
  out.iterations = 1;
  while (std::abs(total(alloc) - target) > delta) {
    if (total(alloc) > target) {
      hi = mid;
    } else {
      lo = mid;
    }
    mid = 0.5 * (lo + hi);
    alloc = solve_at(mid);
    if (++out.iterations > 400) {
      throw InfeasibleError("bisect_ith did not reach the power tolerance");
    }
  }
  out.i_th = mid;
  out.allocation = std::move(alloc);
  return out;
}

BisectionResult bisect_ith(const ChannelGains& gains, const Scenario& scenario,
                           double delta) {
  double hi = 0.0;
  for (int m = 0; m < scenario.num_mues(); ++m) {
    hi = std::max(hi, scenario.p_macro_max * gains.macro_mue.row(m).maxCoeff() /
                          (std::exp2(scenario.rate_mue[m]) - 1.0));
  }
  return bisect_ith(gains, scenario, 0.0, std::max(hi, 1e-15), delta);
}

double macro_rate(const MacroAllocation& macro, const ChannelGains& gains,
                  const Scenario& scenario, int m,
                  const Eigen::MatrixXd& interference) {
  double r = 0.0;
  for (int n = 0; n < scenario.num_channels; ++n) {
    if (macro.gamma(m, n) == 0) continue;
    r += std::log2(1.0 + sinr_macro(macro.power(m, n), gains.macro_mue(m, n),
                                    interference(m, n), scenario.noise));
  }
  return r;
}

}  // namespace hetra
