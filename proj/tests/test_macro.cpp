#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hetra/assignment.hpp"
#include "hetra/macro.hpp"
#include "test_util.hpp"

using namespace hetra;

namespace {

ScenarioConfig fig2_config() {
  ScenarioConfig cfg = fixture::fig8_config();
  cfg.radio.num_channels = 10;
  return cfg;
}

Eigen::MatrixXd at_tolerable(const MacroAllocation& mac) {
  Eigen::MatrixXd i = Eigen::MatrixXd::Zero(mac.gamma.rows(), mac.gamma.cols());
  for (int m = 0; m < i.rows(); ++m) {
    for (int n = 0; n < i.cols(); ++n) {
      if (mac.gamma(m, n) == 1) i(m, n) = mac.tolerable(m, n);
    }
  }
  return i;
}

}  // namespace

TEST(Tolerable, ZeroMargin) {
  const double noise = 1e-13;
  const double g = 1e-9;
  const double p = 31.0 * noise / g;
  EXPECT_NEAR(tolerable_interference(p, g, 5.0, noise, 1e3), 0.0, 1e-25);
}

TEST(Tolerable, ProposedPowerUsesDivisor31) {
  const double p = 20.0 / 3.0;
  const double g = 3e-10;
  EXPECT_DOUBLE_EQ(tolerable_interference(p, g, 5.0, 1e-13, 1e3), p * g / 31.0 - 1e-13);
}

TEST(Tolerable, IncreasingInGainAndCapped) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-12.0, -7.0);
  for (int i = 0; i < 500; ++i) {
    const double g = std::pow(10.0, u(rng));
    const double a = tolerable_interference(5.0, g, 4.0, 1e-13, 1e3);
    const double b = tolerable_interference(5.0, g * 1.001, 4.0, 1e-13, 1e3);
    EXPECT_GT(b, a);
  }
  EXPECT_EQ(tolerable_interference(20.0, 1.0, 1.0, 1e-13, 7.0), 7.0);
}

TEST(Tolerable, Errors) {
  EXPECT_THROW(tolerable_interference(1.0, 1e-15, 5.0, 1e-13, 1e3), InfeasibleError);
  EXPECT_THROW(tolerable_interference(0.0, 1.0, 5.0, 1e-13, 1e3), std::invalid_argument);
}

TEST(Proposed, SingleMuePicksBestChannel) {
  Scenario sc = fixture::bare_scenario(1, 1, 1, 3);
  ChannelGains g = fixture::constant_gains(sc, 1e-9, 1e-10, 1e-7, 1e-10);
  g.macro_mue << 1e-9, 2e-9, 3e-9;
  const auto mac = solve_proposed(g, sc);
  EXPECT_EQ(mac.gamma(0, 2), 1);
  EXPECT_EQ(mac.n_ac, 1);
  EXPECT_EQ(mac.power(0, 2), 20.0);
}

TEST(Proposed, TwoByTwoAssignment) {
  Scenario sc = fixture::bare_scenario(1, 1, 2, 2);
  ChannelGains g = fixture::constant_gains(sc, 1e-9, 1e-10, 1e-7, 1e-10);
  g.macro_mue << 1e-9, 2e-9, 2e-9, 4e-9;
  const auto mac = solve_proposed(g, sc);
  EXPECT_EQ(mac.gamma(0, 0), 1);
  EXPECT_EQ(mac.gamma(1, 1), 1);
}

TEST(Proposed, EqualPowerAndSentinels) {
  fixture::Instance inst;
  ASSERT_TRUE(fixture::make_instance(fig2_config(), 1, 0, inst));
  const auto& mac = inst.macro;
  EXPECT_EQ(mac.n_ac, 3);
  EXPECT_NEAR(mac.total_power(), 20.0, 1e-12);
  for (int m = 0; m < 3; ++m) {
    for (int n = 0; n < 10; ++n) {
      if (mac.gamma(m, n) == 1) {
        EXPECT_NEAR(mac.power(m, n), 6.6667, 1e-4);
        EXPECT_LE(mac.tolerable(m, n), inst.scenario.i_max);
        EXPECT_GE(mac.tolerable(m, n), 0.0);
      } else {
        EXPECT_EQ(mac.power(m, n), 0.0);
        EXPECT_EQ(mac.tolerable(m, n), inst.scenario.i_max);
      }
    }
  }
}

TEST(Proposed, RejectsMoreMuesThanChannels) {
  Scenario sc = fixture::bare_scenario(1, 1, 4, 3);
  const auto g = fixture::constant_gains(sc, 1e-9, 1e-10, 1e-7, 1e-10);
  EXPECT_THROW(solve_proposed(g, sc), std::invalid_argument);
}

TEST(Proposed, StructuralProperties) {
  int checked = 0;
  for (int r = 0; r < 60; ++r) {
    fixture::Instance inst;
    if (!fixture::make_instance(fig2_config(), 21, r, inst)) continue;
    ++checked;
    const auto& mac = inst.macro;
    const auto& sc = inst.scenario;
    const Eigen::MatrixXd interference = at_tolerable(mac);
    for (int m = 0; m < sc.num_mues(); ++m) {
      EXPECT_EQ(mac.gamma.row(m).sum(), 1);
      EXPECT_NEAR(macro_rate(mac, inst.gains, sc, m, interference), sc.rate_mue[m],
                  1e-9 * sc.rate_mue[m]);
      int held = -1;
      for (int n = 0; n < sc.num_channels; ++n) {
        if (mac.gamma(m, n) == 1) held = n;
      }
      for (int n = 0; n < sc.num_channels; ++n) {
        if (mac.gamma.col(n).sum() == 0) {
          EXPECT_GE(inst.gains.macro_mue(m, held), inst.gains.macro_mue(m, n));
        }
      }
    }
  }
  EXPECT_GT(checked, 50);
}

TEST(Proposed, MatchesProblemFourOracle) {
  std::mt19937_64 rng(8);
  int checked = 0;
  for (int r = 0; checked < 30 && r < 200; ++r) {
    auto cfg = fixture::fig8_config();
    cfg.topology.num_mues = 1 + r % 3;
    cfg.radio.num_channels = cfg.topology.num_mues + r % 4;
    fixture::Instance inst;
    if (!fixture::make_instance(cfg, 99, r, inst)) continue;
    ++checked;
    const auto opt = brute_force_max_interference(inst.gains, inst.scenario,
                                                  inst.scenario.num_channels);
    const double ref = inst.macro.finite_tolerable_sum();
    EXPECT_EQ(opt.unconstrained_channels, inst.scenario.num_channels - inst.macro.n_ac);
    EXPECT_NEAR(opt.finite_sum, ref, 1e-9 * ref);
    EXPECT_TRUE(opt.allocation.gamma == inst.macro.gamma);
  }
  EXPECT_EQ(checked, 30);
}

TEST(Proposed, OracleSingleMueSingleChannel) {
  Scenario sc = fixture::bare_scenario(1, 1, 1, 1);
  const auto g = fixture::constant_gains(sc, 2e-9, 1e-10, 1e-7, 1e-10);
  const auto opt = brute_force_max_interference(g, sc, 1);
  EXPECT_DOUBLE_EQ(opt.finite_sum, tolerable_interference(20.0, 2e-9, 5.0, 1e-13, 1e3));
  EXPECT_EQ(opt.unconstrained_channels, 0);
}

TEST(Proposed, OracleSizeGuard) {
  Scenario sc = fixture::bare_scenario(1, 1, 5, 9);
  const auto g = fixture::constant_gains(sc, 2e-9, 1e-10, 1e-7, 1e-10);
  EXPECT_THROW(brute_force_max_interference(g, sc, 2), SizeLimitError);
}

TEST(Traditional, SingleChannelClosedForm) {
  Scenario sc = fixture::bare_scenario(1, 1, 1, 1);
  const double g = 4e-10;
  const auto gains = fixture::constant_gains(sc, g, 1e-10, 1e-7, 1e-10);
  for (double ith : {0.0, 1e-12, 3e-11}) {
    const auto mac = solve_traditional(gains, sc, ith);
    EXPECT_NEAR(mac.power(0, 0), 31.0 * (ith + 1e-13) / g, 1e-9 * 31.0 * (ith + 1e-13) / g);
    EXPECT_EQ(mac.tolerable(0, 0), ith);
  }
}

TEST(Traditional, PowerIncreasingInThreshold) {
  for (int r = 0; r < 15; ++r) {
    fixture::Instance inst;
    if (!fixture::make_instance(fig2_config(), 31, r, inst)) continue;
    double last = -1.0;
    for (double ith = 0.0; ith < 2e-9; ith += 1e-10) {
      const double p = solve_traditional(inst.gains, inst.scenario, ith).total_power();
      EXPECT_GT(p, last);
      last = p;
    }
  }
}

TEST(Traditional, MeetsRatesAndUsesMoreChannels) {
  int more = 0;
  int total = 0;
  for (int r = 0; r < 20; ++r) {
    fixture::Instance inst;
    if (!fixture::make_instance(fig2_config(), 41, r, inst)) continue;
    const auto b = bisect_ith(inst.gains, inst.scenario);
    const auto& mac = b.allocation;
    const Eigen::MatrixXd interference = at_tolerable(mac);
    for (int m = 0; m < inst.scenario.num_mues(); ++m) {
      EXPECT_GE(macro_rate(mac, inst.gains, inst.scenario, m, interference),
                inst.scenario.rate_mue[m] * (1.0 - 1e-6));
    }
    for (int n = 0; n < inst.scenario.num_channels; ++n) EXPECT_LE(mac.gamma.col(n).sum(), 1);
    ++total;
    more += mac.n_ac > inst.scenario.num_mues();
  }
  EXPECT_GE(more, total * 9 / 10);
}

TEST(Traditional, SmallDualityGapAgainstEnumeration) {
  for (int channels : {8, 10}) {
    int exact_hits = 0;
    int total = 0;
    for (int r = 0; r < 20; ++r) {
      auto cfg = fig2_config();
      cfg.topology.num_mues = 2;
      cfg.radio.num_channels = channels;
      fixture::Instance inst;
      if (!fixture::make_instance(cfg, 51, r, inst)) continue;
      const double ith = 1e-10;
      const double dual = solve_traditional(inst.gains, inst.scenario, ith).total_power();
      const double exact = brute_force_traditional(inst.gains, inst.scenario, ith).total_power();
      EXPECT_GE(dual, exact * (1.0 - 1e-9));
      EXPECT_LE(dual, exact * 1.15);
      ++total;
      exact_hits += dual <= exact * (1.0 + 1e-6);
    }
    EXPECT_GE(exact_hits, total * 9 / 10) << "N = " << channels;
  }
}

TEST(Bisection, SingleChannelRoot) {
  Scenario sc = fixture::bare_scenario(1, 1, 1, 1);
  const double g = 4e-10;
  const auto gains = fixture::constant_gains(sc, g, 1e-10, 1e-7, 1e-10);
  const double root = 20.0 * g / 31.0 - 1e-13;
  const double delta = 1e-3;
  const auto b = bisect_ith(gains, sc, 0.0, 2.0 * root, delta);
  EXPECT_LE(std::abs(b.allocation.total_power() - 20.0), delta);
  const double delta_i = delta * g / 31.0;
  EXPECT_LE(std::abs(b.i_th - root), delta_i * 1.0001);
  EXPECT_LE(b.iterations, std::ceil(std::log2(2.0 * root / delta_i)) + 2);
}

TEST(Bisection, ExpandsBracketAndHitsBudget) {
  for (int r = 0; r < 20; ++r) {
    fixture::Instance inst;
    if (!fixture::make_instance(fig2_config(), 61, r, inst)) continue;
    const auto b = bisect_ith(inst.gains, inst.scenario, 0.0, 1e-12, 1e-3);
    EXPECT_GT(b.bracket_doublings, 0);
    EXPECT_LE(std::abs(b.allocation.total_power() - 20.0), 1e-3);
  }
}

TEST(Bisection, Errors) {
  Scenario sc = fixture::bare_scenario(1, 1, 1, 1);
  const auto gains = fixture::constant_gains(sc, 4e-10, 1e-10, 1e-7, 1e-10);
  EXPECT_THROW(bisect_ith(gains, sc, 1.0, 0.5, 1e-3), std::invalid_argument);
  const auto weak = fixture::constant_gains(sc, 1e-20, 1e-10, 1e-7, 1e-10);
  EXPECT_THROW(bisect_ith(weak, sc, 0.0, 1.0, 1e-3), InfeasibleError);
}

TEST(Comparison, ProposedToleratesMoreInterference) {
  int wins = 0;
  int total = 0;
  for (int r = 0; r < 100; ++r) {
    fixture::Instance inst;
    if (!fixture::make_instance(fig2_config(), 71, r, inst)) continue;
    const auto b = bisect_ith(inst.gains, inst.scenario);
    ++total;
    wins += inst.macro.finite_tolerable_sum() >= b.allocation.finite_tolerable_sum();
  }
  EXPECT_GE(wins, total * 9 / 10);
}

TEST(WaterFill, MinPowerMeetsRateAndMaxRateInverts) {
  const std::vector<double> q = {1e13, 3e12, 5e11};
  const auto p = detail::water_fill_min_power(q, 6.0);
  double rate = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    EXPECT_GE(p[i], 0.0);
    rate += std::log2(1.0 + p[i] * q[i]);
    total += p[i];
  }
  EXPECT_NEAR(rate, 6.0, 1e-9);
  EXPECT_NEAR(detail::water_fill_max_rate(q, total), 6.0, 1e-7);
}
