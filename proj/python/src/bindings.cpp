#include <optional>
#include <string>
#include <utility>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hetra/allocation.hpp"
#include "hetra/distributed.hpp"
#include "hetra/harness.hpp"
#include "hetra/macro.hpp"
#include "hetra/model.hpp"
#include "hetra/smallcell.hpp"

namespace py = pybind11;
using namespace hetra;

namespace {

std::pair<Scenario, ChannelGains> realize(const std::string& config_json, std::uint64_t seed,
                                          int realization) {
  const auto cfg = parse_scenario_config(config_json);
  Rng rng(realization_seed(seed, realization));
  Scenario sc = build_scenario(cfg, rng);
  ChannelGains g = realize_gains(sc, rng);
  return {std::move(sc), std::move(g)};
}

py::dict feasibility(const SmallCellAllocation& alloc, const MacroAllocation& macro,
                     const ChannelGains& gains, const Scenario& sc, double tol) {
  const auto rep = check_feasible(alloc, macro, gains, sc, tol);
  py::dict counts;
  for (const char* c : {"C1", "C2", "C3", "C4", "C5", "bounds"}) counts[c] = rep.count(c);
  py::dict out;
  out["feasible"] = rep.feasible;
  out["violations"] = counts;
  out["max_interference_ratio"] = rep.max_interference_ratio;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Tier-aware macro / small-cell resource allocation";

  py::register_exception<InfeasibleError>(m, "InfeasibleError");
  py::register_exception<SizeLimitError>(m, "SizeLimitError");

  py::class_<Scenario>(m, "Scenario")
      .def_property_readonly("num_cells", &Scenario::num_cells)
      .def_property_readonly("num_mues", &Scenario::num_mues)
      .def_property_readonly("num_sues", &Scenario::num_sues)
      .def_readonly("num_channels", &Scenario::num_channels)
      .def_readonly("epsilon", &Scenario::epsilon)
      .def_readonly("noise", &Scenario::noise)
      .def_readonly("p_macro_max", &Scenario::p_macro_max)
      .def_readonly("p_small_max", &Scenario::p_small_max)
      .def_readonly("rate_mue", &Scenario::rate_mue)
      .def_readonly("rate_sue", &Scenario::rate_sue);

  py::class_<ChannelGains>(m, "ChannelGains")
      .def_readonly("macro_mue", &ChannelGains::macro_mue)
      .def_readonly("macro_sue", &ChannelGains::macro_sue)
      .def_readonly("small_sue", &ChannelGains::small_sue)
      .def_readonly("small_mue", &ChannelGains::small_mue);

  m.def("realize", &realize, py::arg("config_json") = "{}", py::arg("seed") = 1,
        py::arg("realization") = 0,
        "Builds realization `realization` of a JSON scenario config: (Scenario, ChannelGains).");

  py::class_<MacroAllocation>(m, "MacroAllocation")
      .def_readonly("gamma", &MacroAllocation::gamma)
      .def_readonly("power", &MacroAllocation::power)
      .def_readonly("tolerable", &MacroAllocation::tolerable)
      .def_readonly("n_ac", &MacroAllocation::n_ac)
      .def("total_power", &MacroAllocation::total_power)
      .def("finite_tolerable_sum", &MacroAllocation::finite_tolerable_sum)
      .def("to_csv", &macro_allocation_csv);

  m.def("tolerable_interference", &tolerable_interference, py::arg("power"), py::arg("gain"),
        py::arg("rate"), py::arg("noise"), py::arg("i_max") = 1e3);
  m.def("solve_proposed", &solve_proposed, py::arg("gains"), py::arg("scenario"));
  m.def("solve_traditional", &solve_traditional, py::arg("gains"), py::arg("scenario"),
        py::arg("i_th"));
  m.def(
      "bisect_ith",
      [](const ChannelGains& g, const Scenario& sc, double delta) {
        auto r = bisect_ith(g, sc, delta);
        return py::make_tuple(r.i_th, r.allocation, r.iterations);
      },
      py::arg("gains"), py::arg("scenario"), py::arg("delta") = 1e-3,
      "Returns (i_th, allocation, iterations).");

  py::class_<SmallCellAllocation>(m, "SmallCellAllocation")
      .def_property_readonly("cells",
                             [](const SmallCellAllocation& a) {
                               py::list out;
                               for (const auto& c : a.cells) {
                                 out.append(py::make_tuple(c.gamma, c.power, c.admit));
                               }
                               return out;
                             })
      .def("total_admitted", &SmallCellAllocation::total_admitted)
      .def("total_share", &SmallCellAllocation::total_share)
      .def("to_csv", &small_allocation_csv);

  m.def("objective_value", &objective_value, py::arg("allocation"), py::arg("epsilon"));
  m.def("check_feasible", &feasibility, py::arg("allocation"), py::arg("macro"),
        py::arg("gains"), py::arg("scenario"), py::arg("tol") = 1e-9);
  m.def("solve_minlp_exact", &solve_minlp_exact, py::arg("macro"), py::arg("gains"),
        py::arg("scenario"), py::arg("max_binaries") = 24);
  m.def(
      "solve_convex_relaxation",
      [](const MacroAllocation& mac, const ChannelGains& g, const Scenario& sc) {
        auto r = solve_convex_relaxation(mac, g, sc);
        return py::make_tuple(r.allocation, r.objective, r.converged);
      },
      py::arg("macro"), py::arg("gains"), py::arg("scenario"),
      "Returns (allocation, objective, converged).");
  m.def(
      "run_algorithm2",
      [](const MacroAllocation& mac, const ChannelGains& g, const Scenario& sc, int l_max,
         double gap_tol) {
        DistributedOptions opt;
        opt.l_max = l_max;
        opt.gap_tol = gap_tol;
        auto r = run_algorithm2(mac, g, sc, opt);
        py::list trace;
        for (const auto& row : r.trace) {
          trace.append(py::make_tuple(row.iteration, row.dual_upper, row.primal_lower, row.gap,
                                      row.max_violation_ratio));
        }
        py::dict out;
        out["allocation"] = r.allocation;
        out["objective"] = r.objective;
        out["converged"] = r.converged;
        out["status"] = r.status;
        out["trace"] = trace;
        out["trace_csv"] = trace_csv(r.trace);
        return out;
      },
      py::arg("macro"), py::arg("gains"), py::arg("scenario"), py::arg("l_max") = 200,
      py::arg("gap_tol") = 1e-2);

  m.def("metric_admitted", &metric_admitted);
  m.def("metric_channel_usage", &metric_channel_usage);

  py::class_<ExperimentResult>(m, "ExperimentResult")
      .def_readonly("name", &ExperimentResult::name)
      .def_readonly("sweep_variable", &ExperimentResult::sweep_variable)
      .def_readonly("sweep_values", &ExperimentResult::sweep_values)
      .def_readonly("solvers", &ExperimentResult::solvers)
      .def_property_readonly_static(
          "metrics", [](py::object) { return ExperimentResult::metrics(); })
      .def("means", &ExperimentResult::means, py::arg("solver"), py::arg("metric"))
      .def("write_csv", [](const ExperimentResult& r, const std::string& path) {
        write_csv(r, path);
      });

  m.def(
      "run_experiment",
      [](const std::string& config_json, std::optional<int> realizations,
         std::optional<std::uint64_t> seed) {
        auto cfg = parse_experiment_config(config_json);
        if (realizations) cfg.realizations = *realizations;
        if (seed) cfg.seed = *seed;
        py::gil_scoped_release release;
        return run_experiment(cfg);
      },
      py::arg("config_json"), py::arg("realizations") = py::none(), py::arg("seed") = py::none());
}
