#include "hetra/allocation.hpp"

#include <limits>
#include <sstream>

#include "hetra/csv.hpp"

namespace hetra {

MacroAllocation MacroAllocation::empty(const Scenario& scenario) {
  const int m = scenario.num_mues();
  const int n = scenario.num_channels;
  MacroAllocation a;
  a.gamma = Eigen::MatrixXi::Zero(m, n);
  a.power = Eigen::MatrixXd::Zero(m, n);
  a.tolerable = Eigen::MatrixXd::Constant(m, n, scenario.i_max);
  a.n_ac = 0;
  return a;
}

int MacroAllocation::owner(int n) const {
  for (int m = 0; m < gamma.rows(); ++m) {
    if (gamma(m, n) != 0) return m;
  }
  return -1;
}

double MacroAllocation::channel_limit(int n) const {
  const int m = owner(n);
  if (m < 0) return std::numeric_limits<double>::infinity();
  return tolerable(m, n);
}

double MacroAllocation::total_power() const {
  double total = 0.0;
  for (int m = 0; m < gamma.rows(); ++m) {
    for (int n = 0; n < gamma.cols(); ++n) {
      if (gamma(m, n) != 0) total += power(m, n);
    }
  }
  return total;
}

double MacroAllocation::finite_tolerable_sum() const {
  double total = 0.0;
  for (int m = 0; m < gamma.rows(); ++m) {
    for (int n = 0; n < gamma.cols(); ++n) {
      if (gamma(m, n) != 0) total += tolerable(m, n);
    }
  }
  return total;
}

double macro_interference_at_sue(const MacroAllocation& macro,
                                 const ChannelGains& gains, int sue_global,
                                 int n) {
  double total = 0.0;
  for (int m = 0; m < macro.gamma.rows(); ++m) {
    if (macro.gamma(m, n) != 0) {
      total += macro.power(m, n) * gains.macro_sue(sue_global, n);
    }
  }
  return total;
}

SmallCellAllocation SmallCellAllocation::zeros(const Scenario& scenario,
                                               AllocationMode mode) {
  SmallCellAllocation a;
  a.mode = mode;
  for (int s = 0; s < scenario.num_cells(); ++s) {
    const int f = scenario.sues_in(s);
    a.cells.push_back({Eigen::MatrixXd::Zero(f, scenario.num_channels),
                       Eigen::MatrixXd::Zero(f, scenario.num_channels),
                       Eigen::VectorXd::Zero(f)});
  }
  return a;
}

double SmallCellAllocation::total_admitted() const {
  double total = 0.0;
  for (const auto& c : cells) total += c.admit.sum();
  return total;
}

double SmallCellAllocation::total_share() const {
  double total = 0.0;
  for (const auto& c : cells) total += c.gamma.sum();
  return total;
}

double cross_tier_interference(const SmallCellAllocation& alloc,
                               const MacroAllocation& macro,
                               const ChannelGains& gains, int n) {
  const int m = macro.owner(n);
  if (m < 0) return 0.0;
  double total = 0.0;
  for (std::size_t s = 0; s < alloc.cells.size(); ++s) {
    const auto& cell = alloc.cells[s];
    for (int f = 0; f < cell.power.rows(); ++f) {
      total += cell.power(f, n) * gains.small_mue[s](m, n);
    }
  }
  return total;
}

std::string macro_allocation_csv(const MacroAllocation& macro) {
  std::ostringstream out;
  out << "m,n,gamma,power_W,tolerable_W\n";
  for (int m = 0; m < macro.gamma.rows(); ++m) {
    for (int n = 0; n < macro.gamma.cols(); ++n) {
      out << m << ',' << n << ',' << macro.gamma(m, n) << ','
          << csv::number(macro.power(m, n)) << ','
          << csv::number(macro.tolerable(m, n)) << '\n';
    }
  }
  return out.str();
}

std::string small_allocation_csv(const SmallCellAllocation& alloc) {
  std::ostringstream out;
  out << "s,f,n,gamma,power_W,admit\n";
  for (std::size_t s = 0; s < alloc.cells.size(); ++s) {
    const auto& cell = alloc.cells[s];
    for (int f = 0; f < cell.gamma.rows(); ++f) {
      for (int n = 0; n < cell.gamma.cols(); ++n) {
        out << s << ',' << f << ',' << n << ',' << csv::number(cell.gamma(f, n))
            << ',' << csv::number(cell.power(f, n)) << ",\n";
      }
    }
  }
  for (std::size_t s = 0; s < alloc.cells.size(); ++s) {
    const auto& cell = alloc.cells[s];
    for (int f = 0; f < cell.admit.size(); ++f) {
      out << s << ',' << f << ",,,," << csv::number(cell.admit[f]) << '\n';
    }
  }
  return out.str();
}

}  // namespace hetra
