#pragma once

#include <vector>

#include <Eigen/Dense>

namespace hetra {

/// Row -> column map of a rectangular assignment (rows <= cols).
struct Assignment {
  std::vector<int> column_of;  // one entry per row
  double objective = 0.0;      // sum of weights, accumulated in row order
};

/// Maximum-weight assignment of every row to a distinct column by the
/// Hungarian method (shortest augmenting paths with potentials), O(R^2 C).
/// Requires rows <= cols.
Assignment solve_assignment(const Eigen::MatrixXd& weights);

/// Exhaustive enumeration of injective row -> column maps. Among equal
/// objectives the lexicographically smallest column vector wins.
Assignment brute_force_assignment(const Eigen::MatrixXd& weights);

}  // namespace hetra
