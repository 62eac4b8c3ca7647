#include <random>

#include <gtest/gtest.h>

#include "hetra/assignment.hpp"

using namespace hetra;

TEST(Assignment, SingleRowPicksArgmax) {
  Eigen::MatrixXd w(1, 3);
  w << 1, 2, 3;
  const auto a = solve_assignment(w);
  EXPECT_EQ(a.column_of, std::vector<int>{2});
  EXPECT_EQ(a.objective, 3.0);
}

TEST(Assignment, GlobalBeatsGreedy) {
  Eigen::MatrixXd w(2, 2);
  w << 1, 2, 2, 4;
  const auto a = solve_assignment(w);
  EXPECT_EQ(a.column_of, (std::vector<int>{0, 1}));
  EXPECT_EQ(a.objective, 5.0);
}

TEST(Assignment, SharedFavouriteResolvedGlobally) {
  Eigen::MatrixXd w(3, 4);
  w << 9, 8, 1, 0,
       10, 2, 1, 0,
       10, 9, 3, 0;
  const auto a = solve_assignment(w);
  EXPECT_EQ(a.objective, brute_force_assignment(w).objective);
  EXPECT_EQ(a.objective, 8 + 10 + 3);
}

TEST(Assignment, TiesGoToLowestIndices) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Ones(2, 3);
  EXPECT_EQ(solve_assignment(w).column_of, (std::vector<int>{0, 1}));
  EXPECT_EQ(brute_force_assignment(w).column_of, (std::vector<int>{0, 1}));
}

TEST(Assignment, RejectsMoreRowsThanColumns) {
  EXPECT_THROW(solve_assignment(Eigen::MatrixXd::Ones(3, 2)), std::invalid_argument);
  EXPECT_THROW(brute_force_assignment(Eigen::MatrixXd::Ones(3, 2)), std::invalid_argument);
}

TEST(Assignment, MatchesEnumerationOnRandomInstances) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> rows(1, 6);
  std::lognormal_distribution<double> w(-20.0, 2.0);
  for (int i = 0; i < 300; ++i) {
    const int m = rows(rng);
    const int n = std::uniform_int_distribution<int>(m, 8)(rng);
    Eigen::MatrixXd weights(m, n);
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < n; ++b) weights(a, b) = w(rng);
    }
    const auto fast = solve_assignment(weights);
    const auto slow = brute_force_assignment(weights);
    ASSERT_EQ(fast.objective, slow.objective) << "instance " << i;
    std::vector<bool> used(n, false);
    for (int c : fast.column_of) {
      ASSERT_FALSE(used[c]);
      used[c] = true;
    }
  }
}

TEST(Assignment, IntegerWeightsWithManyTies) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> w(0, 3);
  for (int i = 0; i < 200; ++i) {
    Eigen::MatrixXd weights(4, 6);
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 6; ++b) weights(a, b) = w(rng);
    }
    EXPECT_EQ(solve_assignment(weights).objective, brute_force_assignment(weights).objective);
  }
}
