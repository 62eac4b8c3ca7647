#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "grid_oracle.hpp"
#include "hetra/smallcell.hpp"
#include "test_util.hpp"

namespace hetra {
namespace {

// Macro tier owning every channel with MUE 0 at 1 W and tolerable level `limit`.
MacroAllocation owned_by_first(const Scenario& sc, double limit) {
  auto mac = MacroAllocation::empty(sc);
  for (int n = 0; n < sc.num_channels; ++n) {
    mac.gamma(0, n) = 1;
    mac.power(0, n) = 1.0;
    mac.tolerable(0, n) = limit;
  }
  mac.n_ac = sc.num_channels;
  return mac;
}

MacroAllocation scaled_limits(MacroAllocation mac, double factor) {
  for (int m = 0; m < mac.gamma.rows(); ++m) {
    for (int n = 0; n < mac.gamma.cols(); ++n) {
      if (mac.gamma(m, n) == 1) mac.tolerable(m, n) *= factor;
    }
  }
  return mac;
}

TEST(Objective, Examples) {
  Scenario sc = fixture::bare_scenario(1, 1, 1, 1);
  auto a = SmallCellAllocation::zeros(sc, AllocationMode::kExact);
  EXPECT_DOUBLE_EQ(objective_value(a, 0.1), 0.0);
  a.cells[0].admit[0] = 1.0;
  a.cells[0].gamma(0, 0) = 1.0;
  EXPECT_NEAR(objective_value(a, 0.1), 0.8, 1e-15);

  Scenario wide = fixture::bare_scenario(2, 2, 1, 10);
  EXPECT_NEAR(wide.default_epsilon(), 0.9 / 21.0, 1e-15);
  EXPECT_NEAR(wide.default_epsilon(), 0.042857, 1e-6);
}

TEST(PerspectiveRate, PlainRateAndExtension) {
  const double g = 2e-8;
  const double ib = 3e-12;
  const double no = 1e-13;
  EXPECT_NEAR(perspective_rate(1.0, 0.01, g, ib, no), std::log2(1.0 + 0.01 * g / (ib + no)),
              1e-12);
  EXPECT_DOUBLE_EQ(perspective_rate(0.0, 0.0, g, ib, no), 0.0);
  EXPECT_THROW(perspective_rate(0.0, 0.01, g, ib, no), std::invalid_argument);
}

TEST(PerspectiveRate, JointlyConcave) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> share(0.0, 1.0);
  std::uniform_real_distribution<double> power(0.0, 0.03);
  const double g = 1e-8;
  const double ib = 1e-12;
  const double no = 1e-13;
  auto f = [&](double a, double p) {
    if (a == 0.0) return 0.0;
    return perspective_rate(a, p, g, ib, no);
  };
  for (int i = 0; i < 1000; ++i) {
    const double a1 = share(rng), p1 = power(rng);
    const double a2 = share(rng), p2 = power(rng);
    const double mid = f(0.5 * (a1 + a2), 0.5 * (p1 + p2));
    const double avg = 0.5 * (f(a1, p1) + f(a2, p2));
    EXPECT_GE(mid, avg - 1e-12 * std::max(1.0, avg));
  }
}

TEST(CheckFeasible, ZeroAllocationAndPowerBoundary) {
  Scenario sc = fixture::bare_scenario(1, 1, 1, 2);
  const auto gains = fixture::constant_gains(sc, 1e-9, 1e-12, 1e-7, 1e-9);
  const auto mac = owned_by_first(sc, 1e-10);
  auto a = SmallCellAllocation::zeros(sc, AllocationMode::kExact);
  EXPECT_TRUE(check_feasible(a, mac, gains, sc).feasible);

  a.cells[0].gamma(0, 0) = 1.0;
  a.cells[0].gamma(0, 1) = 1.0;
  a.cells[0].power(0, 0) = 0.5 * sc.p_small_max;
  a.cells[0].power(0, 1) = 0.5 * sc.p_small_max + 1e-6;
  const auto rep = check_feasible(a, mac, gains, sc);
  EXPECT_FALSE(rep.feasible);
  EXPECT_EQ(rep.count("C2"), 1);
}

TEST(CheckFeasible, CrossTierSlackByHand) {
  Scenario sc = fixture::bare_scenario(2, 1, 1, 1);
  auto gains = fixture::constant_gains(sc, 1e-9, 1e-12, 1e-7, 1e-9);
  gains.small_mue[0](0, 0) = 2e-9;
  gains.small_mue[1](0, 0) = 5e-9;
  const double limit = 3e-11;
  const auto mac = owned_by_first(sc, limit);
  auto a = SmallCellAllocation::zeros(sc, AllocationMode::kExact);
  a.cells[0].gamma(0, 0) = 1.0;
  a.cells[0].power(0, 0) = 0.01;
  a.cells[1].gamma(0, 0) = 1.0;
  a.cells[1].power(0, 0) = 0.004;
  const double load = 0.01 * 2e-9 + 0.004 * 5e-9;
  EXPECT_NEAR(cross_tier_interference(a, mac, gains, 0), load, 1e-24);
  const auto rep = check_feasible(a, mac, gains, sc);
  ASSERT_EQ(rep.count("C3"), 1);
  for (const auto& v : rep.violations) {
    if (v.constraint == "C3") EXPECT_NEAR(v.slack, limit - load, 1e-22);
  }
  EXPECT_NEAR(rep.max_interference_ratio, load / limit, 1e-12);
}

TEST(Exact, NoSues) {
  Scenario sc = fixture::bare_scenario(1, 0, 1, 2);
  const auto gains = fixture::constant_gains(sc, 1e-9, 1e-12, 1e-7, 1e-9);
  const auto a = solve_minlp_exact(owned_by_first(sc, 1e-10), gains, sc);
  EXPECT_DOUBLE_EQ(objective_value(a, sc.epsilon), 0.0);
}

TEST(Exact, ForcedSingleChannelOptimum) {
  Scenario sc = fixture::bare_scenario(1, 1, 1, 1);
  const auto gains = fixture::constant_gains(sc, 1e-9, 1e-12, 1e-7, 1e-9);
  const auto mac = owned_by_first(sc, sc.i_max);
  const auto a = solve_minlp_exact(mac, gains, sc);
  EXPECT_DOUBLE_EQ(a.cells[0].admit[0], 1.0);
  EXPECT_DOUBLE_EQ(a.cells[0].gamma(0, 0), 1.0);
  EXPECT_NEAR(objective_value(a, sc.epsilon), (1.0 - sc.epsilon) - sc.epsilon, 1e-15);
  EXPECT_TRUE(check_feasible(a, mac, gains, sc).feasible);
}

TEST(Exact, SizeGuard) {
  Scenario sc = fixture::bare_scenario(2, 3, 1, 5);
  const auto gains = fixture::constant_gains(sc, 1e-9, 1e-12, 1e-7, 1e-9);
  EXPECT_THROW(solve_minlp_exact(owned_by_first(sc, 1e-10), gains, sc), SizeLimitError);
}

TEST(Relaxation, GenerousLimitsAdmitEveryone) {
  Scenario sc = fixture::bare_scenario(1, 2, 1, 3);
  const auto gains = fixture::constant_gains(sc, 1e-9, 1e-12, 1e-7, 1e-9);
  const auto mac = owned_by_first(sc, sc.i_max);
  const auto r = solve_convex_relaxation(mac, gains, sc);
  ASSERT_TRUE(r.converged) << r.message;
  for (int f = 0; f < 2; ++f) EXPECT_NEAR(r.allocation.cells[0].admit[f], 1.0, 1e-6);
  // each SUE needs 5 bps/Hz; at SINR ~ 2.9e4 a share of about a third suffices
  EXPECT_LT(r.allocation.total_share(), 1.0);
  EXPECT_TRUE(check_feasible(r.allocation, mac, gains, sc, 1e-6).feasible);
}

TEST(Relaxation, BlockedSpectrumAdmitsNobody) {
  Scenario sc = fixture::bare_scenario(1, 2, 1, 3);
  const auto gains = fixture::constant_gains(sc, 1e-9, 1e-12, 1e-7, 1e-9);
  const auto mac = owned_by_first(sc, 0.0);
  const auto r = solve_convex_relaxation(mac, gains, sc);
  EXPECT_LT(r.allocation.total_admitted(), 1e-6);
  EXPECT_LT(r.objective, 1e-6);
}

class DeskInstances : public ::testing::Test {
 protected:
  static constexpr int kCount = 6;
  void SetUp() override {
    for (int r = 0; instances.size() < kCount && r < 40; ++r) {
      fixture::Instance inst;
      if (fixture::make_instance(fixture::fig8_config(), 91, r, inst)) {
        instances.push_back(std::move(inst));
      }
    }
    ASSERT_EQ(instances.size(), static_cast<std::size_t>(kCount));
  }
  std::vector<fixture::Instance> instances;
};

TEST_F(DeskInstances, RelaxationBoundsExactAndBothFeasible) {
  for (const auto& inst : instances) {
    const auto ex = solve_minlp_exact(inst.macro, inst.gains, inst.scenario);
    const auto rel = solve_convex_relaxation(inst.macro, inst.gains, inst.scenario);
    const double eps = inst.scenario.epsilon;
    EXPECT_GE(rel.objective - objective_value(ex, eps), -1e-8);
    EXPECT_TRUE(check_feasible(ex, inst.macro, inst.gains, inst.scenario).feasible);
    EXPECT_TRUE(check_feasible(rel.allocation, inst.macro, inst.gains, inst.scenario, 1e-6)
                    .feasible);
  }
}

TEST_F(DeskInstances, ExactMatchesGridOracleAndMaximizesAdmissions) {
  for (const auto& inst : instances) {
    const auto ex = solve_minlp_exact(inst.macro, inst.gains, inst.scenario);
    const auto grid = oracle::grid_search(inst.macro, inst.gains, inst.scenario);
    EXPECT_NEAR(objective_value(ex, inst.scenario.epsilon), grid.objective, 1e-3);
    const int most = max_admissible(inst.macro, inst.gains, inst.scenario);
    EXPECT_EQ(most, grid.max_admitted);
    EXPECT_EQ(static_cast<int>(std::lround(ex.total_admitted())), most);
  }
}

TEST_F(DeskInstances, MonotoneInTolerableLevels) {
  for (const auto& inst : instances) {
    double last_exact = std::numeric_limits<double>::infinity();
    double last_relaxed = std::numeric_limits<double>::infinity();
    for (double factor : {4.0, 1.0, 0.25, 0.05, 0.0}) {
      const auto mac = scaled_limits(inst.macro, factor);
      const double eps = inst.scenario.epsilon;
      const double ex =
          objective_value(solve_minlp_exact(mac, inst.gains, inst.scenario), eps);
      const double rel = solve_convex_relaxation(mac, inst.gains, inst.scenario).objective;
      EXPECT_LE(ex, last_exact + 1e-12);
      EXPECT_LE(rel, last_relaxed + 1e-6);
      last_exact = ex;
      last_relaxed = rel;
    }
  }
}

}  // namespace
}  // namespace hetra
