#pragma once

// Small dense log-barrier interior-point solver for the convex programs of
// the small-cell tier: linear objective, linear inequalities and
// sum-of-perspective-log rate constraints.

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hetra::convex {

struct LinearTerm {
  int var = 0;
  double coef = 0.0;
};

/// sum coef * x[var] <= rhs
struct LinearConstraint {
  std::vector<LinearTerm> terms;
  double rhs = 0.0;
};

/// share * log2(1 + gain * power / share).
/// share < 0 means a unit share (plain log rate); power < 0 means the
/// constant fixed_power.
struct RateTerm {
  int share = -1;
  int power = -1;
  double gain = 0.0;
  double fixed_power = 0.0;
};

/// sum(terms) >= sum(demand) + demand_const
struct RateConstraint {
  std::vector<RateTerm> terms;
  std::vector<LinearTerm> demand;
  double demand_const = 0.0;
};

/// minimize cost^T x subject to every constraint.
struct Program {
  int num_vars = 0;
  Eigen::VectorXd cost;
  std::vector<LinearConstraint> linear;
  std::vector<RateConstraint> rates;

  int num_constraints() const {
    return static_cast<int>(linear.size() + rates.size());
  }
};

struct Options {
  double gap_tol = 1e-9;  // stop once (constraints / t) falls below this
  double mu = 20.0;
  double t0 = 1.0;
  int max_newton = 200;  // per centering step
  int max_outer = 80;
  // Early exit for feasibility tests: stop as soon as the objective is
  // <= target (reached) or provably > target (objective - m/t > target).
  bool use_target = false;
  double target = 0.0;
};

struct Result {
  Eigen::VectorXd x;
  double objective = 0.0;
  double gap_bound = 0.0;  // m / t at the last centering step
  int newton_steps = 0;
  bool converged = false;
  bool target_reached = false;
  bool target_excluded = false;
  std::string message;
};

/// Value of every constraint in "f(x) <= 0" form (linear first, then rate).
/// Rate constraints report +inf outside their domain.
Eigen::VectorXd constraint_values(const Program& program, const Eigen::VectorXd& x);

bool strictly_feasible(const Program& program, const Eigen::VectorXd& x);

/// Barrier method from a strictly feasible x0. Throws std::invalid_argument
/// if x0 is not strictly feasible.
Result minimize(const Program& program, const Eigen::VectorXd& x0,
                const Options& options = {});

/// share * log2(1 + gain * power / share) with the value 0 at share = 0.
double perspective_log2(double share, double power, double gain);

}  // namespace hetra::convex
