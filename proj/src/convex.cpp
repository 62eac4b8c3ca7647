#include "hetra/convex.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace hetra::convex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = std::numbers::ln2;

double share_of(const RateTerm& t, const Eigen::VectorXd& x) {
  return t.share < 0 ? 1.0 : x[t.share];
}

double power_of(const RateTerm& t, const Eigen::VectorXd& x) {
  return t.power < 0 ? t.fixed_power : x[t.power];
}

double linear_value(const LinearConstraint& c, const Eigen::VectorXd& x) {
  double v = -c.rhs;
  for (const auto& t : c.terms) v += t.coef * x[t.var];
  return v;
}

// f(x) = demand - sum(terms); +inf outside the domain.
double rate_value(const RateConstraint& c, const Eigen::VectorXd& x) {
  double v = c.demand_const;
  for (const auto& t : c.demand) v += t.coef * x[t.var];
  for (const auto& t : c.terms) {
    const double s = share_of(t, x);
    const double p = power_of(t, x);
    if (!(s > 0.0) || p < 0.0) return kInf;
    v -= s * std::log1p(t.gain * p / s) / kLn2;
  }
  return v;
}

struct Workspace {
  Eigen::VectorXd f;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

// Barrier gradient and Hessian at x (t * cost included in the gradient).
void assemble(const Program& prog, const Eigen::VectorXd& x, double t,
              Workspace& ws) {
  const int n = prog.num_vars;
  ws.grad = t * prog.cost;
  ws.hess.setZero(n, n);

  for (std::size_t i = 0; i < prog.linear.size(); ++i) {
    const auto& c = prog.linear[i];
    const double fi = ws.f[static_cast<Eigen::Index>(i)];
    const double inv = -1.0 / fi;
    for (const auto& a : c.terms) ws.grad[a.var] += a.coef * inv;
    const double inv2 = inv * inv;
    for (const auto& a : c.terms) {
      for (const auto& b : c.terms) ws.hess(a.var, b.var) += a.coef * b.coef * inv2;
    }
  }

  // Sparse gradient of one rate constraint as (index, value) pairs.
  std::vector<std::pair<int, double>> g;
  for (std::size_t k = 0; k < prog.rates.size(); ++k) {
    const auto& c = prog.rates[k];
    const double fi = ws.f[static_cast<Eigen::Index>(prog.linear.size() + k)];
    const double inv = -1.0 / fi;
    g.clear();
    for (const auto& d : c.demand) g.emplace_back(d.var, d.coef);
    for (const auto& term : c.terms) {
      const double s = share_of(term, x);
      const double p = power_of(term, x);
      const double u = term.gain * p / s;
      const double one_u = 1.0 + u;
      // Gradient of -term.
      if (term.power >= 0) g.emplace_back(term.power, -term.gain / (one_u * kLn2));
      if (term.share >= 0) {
        g.emplace_back(term.share, -(std::log1p(u) - u / one_u) / kLn2);
      }
      // Hessian of -term is PSD: (1 / (ln2 s (1+u)^2)) v v^T with
      // v = (u, -gain) over (share, power).
      const double scale = inv / (kLn2 * s * one_u * one_u);
      if (term.share >= 0) ws.hess(term.share, term.share) += scale * u * u;
      if (term.power >= 0) {
        ws.hess(term.power, term.power) += scale * term.gain * term.gain;
      }
      if (term.share >= 0 && term.power >= 0) {
        ws.hess(term.share, term.power) -= scale * u * term.gain;
        ws.hess(term.power, term.share) -= scale * u * term.gain;
      }
    }
    for (const auto& [i, v] : g) ws.grad[i] += v * inv;
    const double inv2 = inv * inv;
    for (const auto& [i, vi] : g) {
      for (const auto& [j, vj] : g) ws.hess(i, j) += vi * vj * inv2;
    }
  }
}

bool all_negative(const Eigen::VectorXd& f) {
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (!(f[i] < 0.0)) return false;
  }
  return true;
}

}  // namespace

double perspective_log2(double share, double power, double gain) {
  if (share <= 0.0) return 0.0;
  return share * std::log1p(gain * power / share) / kLn2;
}

Eigen::VectorXd constraint_values(const Program& program, const Eigen::VectorXd& x) {
  Eigen::VectorXd f(program.num_constraints());
  Eigen::Index i = 0;
  for (const auto& c : program.linear) f[i++] = linear_value(c, x);
  for (const auto& c : program.rates) f[i++] = rate_value(c, x);
  return f;
}

bool strictly_feasible(const Program& program, const Eigen::VectorXd& x) {
  return all_negative(constraint_values(program, x));
}

Result minimize(const Program& prog, const Eigen::VectorXd& x0, const Options& opt) {
  if (x0.size() != prog.num_vars || prog.cost.size() != prog.num_vars) {
    throw std::invalid_argument("barrier: dimension mismatch");
  }
  Workspace ws;
  ws.f = constraint_values(prog, x0);
  if (!all_negative(ws.f)) {
    throw std::invalid_argument("barrier: starting point is not strictly feasible");
  }
  const double m = std::max(1, prog.num_constraints());

  Result res;
  res.x = x0;
  double t = opt.t0;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd f_trial;

  if (prog.num_constraints() == 0) {
    res.converged = prog.cost.isZero();
    res.objective = prog.cost.dot(x);
    res.message = res.converged ? "" : "unbounded: no constraints";
    return res;
  }

  for (int outer = 0; outer < opt.max_outer; ++outer) {
    bool centered = false;
    for (int it = 0; it < opt.max_newton; ++it) {
      assemble(prog, x, t, ws);
      Eigen::LLT<Eigen::MatrixXd> llt(ws.hess);
      Eigen::VectorXd dx;
      if (llt.info() == Eigen::Success) {
        dx = -llt.solve(ws.grad);
      } else {
        const double reg = 1e-12 * std::max(1.0, ws.hess.diagonal().cwiseAbs().maxCoeff());
        Eigen::MatrixXd h = ws.hess;
        h.diagonal().array() += reg;
        dx = -h.ldlt().solve(ws.grad);
      }
      const double slope = ws.grad.dot(dx);
      ++res.newton_steps;
      if (!std::isfinite(slope) || -slope / 2.0 <= 1e-7) {
        centered = true;
        break;
      }

      // Largest step that keeps strict feasibility, then Armijo on the
      // barrier difference computed term by term to avoid cancellation.
      double step = 1.0;
      bool accepted = false;
      bool stalled = false;
      for (int ls = 0; ls < 80; ++ls) {
        const Eigen::VectorXd xt = x + step * dx;
        f_trial = constraint_values(prog, xt);
        if (all_negative(f_trial)) {
          double diff = t * step * prog.cost.dot(dx);
          for (Eigen::Index i = 0; i < f_trial.size(); ++i) {
            diff -= std::log(f_trial[i] / ws.f[i]);
          }
          if (diff <= 0.01 * step * slope) {
            stalled = (xt - x).cwiseAbs().maxCoeff() <=
                      1e-15 * std::max(1.0, x.cwiseAbs().maxCoeff());
            x = xt;
            ws.f = f_trial;
            accepted = true;
            break;
          }
        }
        step *= 0.5;
      }
      if (!accepted || stalled) {
        // No progress possible at working precision.
        centered = -slope / 2.0 <= 1e-4;
        break;
      }
    }
    res.x = x;
    res.gap_bound = m / t;
    if (opt.use_target) {
      const double value = prog.cost.dot(x);
      if (value <= opt.target) {
        res.target_reached = true;
        res.converged = true;
        break;
      }
      if (centered && value - m / t > opt.target) {
        res.target_excluded = true;
        res.converged = true;
        break;
      }
    }
    if (!centered) {
      res.message = "centering did not converge";
      break;
    }
    if (m / t <= opt.gap_tol) {
      res.converged = true;
      break;
    }
    t *= opt.mu;
  }
  if (!res.converged && res.message.empty()) res.message = "outer iteration limit";
  res.objective = prog.cost.dot(res.x);
  return res;
}

}  // namespace hetra::convex
