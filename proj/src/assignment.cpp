#include "hetra/assignment.hpp"

#include <limits>
#include <stdexcept>

namespace hetra {

namespace {

double row_order_sum(const Eigen::MatrixXd& w, const std::vector<int>& cols) {
  double total = 0.0;
  for (std::size_t r = 0; r < cols.size(); ++r) total += w(r, cols[r]);
  return total;
}

}  // namespace

Assignment solve_assignment(const Eigen::MatrixXd& weights) {
  const int rows = static_cast<int>(weights.rows());
  const int cols = static_cast<int>(weights.cols());
  if (rows > cols) {
    throw std::invalid_argument("assignment needs rows <= cols");
  }
  Assignment result;
  if (rows == 0) return result;

  // Minimize cost = -weight. Potentials u (rows), v (cols); index 0 is the
  // virtual source. match[j] = row matched to column j (1-based, 0 = free).
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<int> match(cols + 1, 0), way(cols + 1, 0);
  for (int i = 1; i <= rows; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(cols + 1, kInf);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = -weights(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  result.column_of.assign(rows, -1);
  for (int j = 1; j <= cols; ++j) {
    if (match[j] != 0) result.column_of[match[j] - 1] = j - 1;
  }
  result.objective = row_order_sum(weights, result.column_of);
  return result;
}

Assignment brute_force_assignment(const Eigen::MatrixXd& weights) {
  const int rows = static_cast<int>(weights.rows());
  const int cols = static_cast<int>(weights.cols());
  if (rows > cols) {
    throw std::invalid_argument("assignment needs rows <= cols");
  }
  Assignment best;
  best.objective = -std::numeric_limits<double>::infinity();
  if (rows == 0) {
    best.objective = 0.0;
    return best;
  }
  std::vector<int> current(rows, -1);
  std::vector<char> taken(cols, 0);

  auto recurse = [&](auto&& self, int r, double partial) -> void {
    if (r == rows) {
      if (partial > best.objective) {
        best.objective = partial;
        best.column_of = current;
      }
      return;
    }
    for (int c = 0; c < cols; ++c) {
      if (taken[c]) continue;
      taken[c] = 1;
      current[r] = c;
      self(self, r + 1, partial + weights(r, c));
      taken[c] = 0;
    }
  };
  recurse(recurse, 0, 0.0);
  return best;
}

}  // namespace hetra
