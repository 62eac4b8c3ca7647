#include "hetra/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "hetra/csv.hpp"
#include "hetra/distributed.hpp"
#include "hetra/macro.hpp"
#include "hetra/smallcell.hpp"

namespace hetra {

double metric_admitted(const SmallCellAllocation& alloc, const Scenario& scenario) {
  const int f = scenario.num_sues();
  return f == 0 ? 0.0 : 100.0 * alloc.total_admitted() / f;
}

double metric_admitted_rounded(const SmallCellAllocation& alloc, const Scenario& scenario) {
  const int f = scenario.num_sues();
  if (f == 0) return 0.0;
  int count = 0;
  for (const auto& cell : alloc.cells) {
    for (Eigen::Index i = 0; i < cell.admit.size(); ++i) {
      if (cell.admit[i] >= 0.999) ++count;
    }
  }
  return 100.0 * count / f;
}

double metric_channel_usage(const SmallCellAllocation& alloc, const Scenario& scenario) {
  const int slots = scenario.num_cells() * scenario.num_channels;
  return slots == 0 ? 0.0 : 100.0 * alloc.total_share() / slots;
}

namespace {

const char* macro_name(MacroMethod m) {
  return m == MacroMethod::kProposed ? "proposed" : "traditional";
}

const char* small_name(SmallMethod m) {
  switch (m) {
    case SmallMethod::kExact: return "exact";
    case SmallMethod::kConvex: return "convex";
    case SmallMethod::kDistributed: return "distributed";
  }
  return "";
}

MacroMethod parse_macro(const std::string& s) {
  if (s == "proposed") return MacroMethod::kProposed;
  if (s == "traditional") return MacroMethod::kTraditional;
  throw std::invalid_argument("unknown macro method: " + s);
}

SmallMethod parse_small(const std::string& s) {
  if (s == "exact") return SmallMethod::kExact;
  if (s == "convex") return SmallMethod::kConvex;
  if (s == "distributed") return SmallMethod::kDistributed;
  throw std::invalid_argument("unknown small-cell method: " + s);
}

}  // namespace

std::string chain_label(const SolverChain& chain) {
  if (!chain.label.empty()) return chain.label;
  return std::string(macro_name(chain.macro)) + "+" + small_name(chain.small);
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  using nlohmann::json;
  ExperimentConfig cfg;
  try {
    const json root = json::parse(json_text, nullptr, true, true);
    cfg.name = root.value("name", cfg.name);
    if (root.contains("scenario")) {
      cfg.scenario = parse_scenario_config(root["scenario"].dump());
    }
    if (root.contains("sweep")) {
      const auto& sw = root["sweep"];
      cfg.sweep_variable = sw.at("variable").get<std::string>();
      cfg.sweep_values = sw.at("values").get<std::vector<double>>();
    }
    if (root.contains("solvers")) {
      for (const auto& s : root["solvers"]) {
        SolverChain c;
        c.macro = parse_macro(s.value("macro", "proposed"));
        c.small = parse_small(s.value("small", "convex"));
        c.label = s.value("label", "");
        cfg.solvers.push_back(c);
      }
    }
    cfg.realizations = root.value("realizations", cfg.realizations);
    cfg.seed = root.value("seed", cfg.seed);
    cfg.gap_tol = root.value("gap_tol", cfg.gap_tol);
    cfg.l_max = root.value("l_max", cfg.l_max);
    cfg.bisection_delta = root.value("bisection_delta", cfg.bisection_delta);
    cfg.threads = root.value("threads", cfg.threads);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("experiment config: ") + e.what());
  }
  if (cfg.solvers.empty()) cfg.solvers.push_back({});
  if (cfg.sweep_values.empty()) throw std::invalid_argument("experiment config: empty sweep");
  if (cfg.realizations < 1) throw std::invalid_argument("experiment config: realizations < 1");
  ScenarioConfig probe = cfg.scenario;
  apply_sweep(probe, cfg.sweep_variable, cfg.sweep_values.front());
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open experiment config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

void apply_sweep(ScenarioConfig& config, const std::string& variable, double value) {
  if (variable == "num_mues") {
    config.topology.num_mues = static_cast<int>(std::lround(value));
  } else if (variable == "num_channels") {
    config.radio.num_channels = static_cast<int>(std::lround(value));
  } else if (variable == "rate_mue") {
    config.radio.rate_mue = value;
  } else if (variable == "rate_sue") {
    config.radio.rate_sue = value;
  } else if (variable == "p_small_max") {
    config.radio.p_small_max = value;
  } else if (variable == "wall_loss_db") {
    config.radio.wall_loss_db = value;
  } else {
    throw std::invalid_argument("unknown sweep variable: " + variable);
  }
}

std::uint64_t realization_seed(std::uint64_t base, int realization) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(realization)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {

void run_chain(const ExperimentConfig& cfg, const SolverChain& chain, const Scenario& sc,
               const ChannelGains& gains, RealizationRecord& rec) {
  try {
    const MacroAllocation macro = chain.macro == MacroMethod::kProposed
                                      ? solve_proposed(gains, sc)
                                      : bisect_ith(gains, sc, cfg.bisection_delta).allocation;
    SmallCellAllocation alloc;
    switch (chain.small) {
      case SmallMethod::kExact:
        alloc = solve_minlp_exact(macro, gains, sc);
        break;
      case SmallMethod::kConvex: {
        auto r = solve_convex_relaxation(macro, gains, sc);
        if (!r.converged) rec.status = "nonconverged";
        alloc = std::move(r.allocation);
        break;
      }
      case SmallMethod::kDistributed: {
        DistributedOptions opt;
        opt.gap_tol = cfg.gap_tol;
        opt.l_max = cfg.l_max;
        opt.parallel = false;
        auto r = run_algorithm2(macro, gains, sc, opt);
        if (!r.converged) rec.status = "nonconverged";
        alloc = std::move(r.allocation);
        break;
      }
    }
    rec.admitted_pct = metric_admitted(alloc, sc);
    rec.admitted_rounded_pct = metric_admitted_rounded(alloc, sc);
    rec.channel_usage_pct = metric_channel_usage(alloc, sc);
    rec.objective = objective_value(alloc, sc.epsilon);
  } catch (const InfeasibleError&) {
    rec.status = "infeasible";
  } catch (const std::exception&) {
    rec.status = "error";
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.name = cfg.name;
  res.sweep_variable = cfg.sweep_variable;
  res.sweep_values = cfg.sweep_values;
  res.realizations = cfg.realizations;
  for (const auto& c : cfg.solvers) res.solvers.push_back(chain_label(c));

  const std::size_t points = cfg.sweep_values.size();
  const std::size_t chains = cfg.solvers.size();
  const int reps = cfg.realizations;
  res.records.resize(points * chains * reps);
  auto slot = [&](std::size_t p, std::size_t c, int r) -> RealizationRecord& {
    return res.records[(p * chains + c) * reps + r];
  };

  const std::size_t jobs = points * reps;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      const std::size_t p = j / reps;
      const int r = static_cast<int>(j % reps);
      const std::uint64_t seed = realization_seed(cfg.seed, r);
      ScenarioConfig sc_cfg = cfg.scenario;
      apply_sweep(sc_cfg, cfg.sweep_variable, cfg.sweep_values[p]);
      sc_cfg.seed = seed;
      Rng rng(seed);
      const Scenario sc = build_scenario(sc_cfg, rng);
      const ChannelGains gains = realize_gains(sc, rng);
      for (std::size_t c = 0; c < chains; ++c) {
        auto& rec = slot(p, c, r);
        rec.sweep_value = cfg.sweep_values[p];
        rec.solver = res.solvers[c];
        rec.realization = r;
        rec.seed = seed;
        run_chain(cfg, cfg.solvers[c], sc, gains, rec);
      }
    }
  };
  unsigned threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, jobs)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return res;
}

const std::vector<std::string>& ExperimentResult::metrics() {
  static const std::vector<std::string> names{"admitted_pct", "admitted_rounded_pct",
                                              "channel_usage_pct", "objective", "failures"};
  return names;
}

namespace {

double record_metric(const RealizationRecord& r, const std::string& metric) {
  if (metric == "admitted_pct") return r.admitted_pct;
  if (metric == "admitted_rounded_pct") return r.admitted_rounded_pct;
  if (metric == "channel_usage_pct") return r.channel_usage_pct;
  if (metric == "objective") return r.objective;
  throw std::invalid_argument("unknown metric: " + metric);
}

}  // namespace

MetricSummary ExperimentResult::summary(std::size_t point, const std::string& solver,
                                        const std::string& metric) const {
  MetricSummary out;
  std::vector<double> values;
  int failures = 0;
  int total = 0;
  for (const auto& r : records) {
    if (r.sweep_value != sweep_values[point] || r.solver != solver) continue;
    ++total;
    if (r.status != "ok") {
      ++failures;
      continue;
    }
    if (metric != "failures") values.push_back(record_metric(r, metric));
  }
  if (metric == "failures") {
    out.mean = failures;
    out.n = total;
    return out;
  }
  out.n = static_cast<int>(values.size());
  if (out.n == 0) {
    out.mean = std::nan("");
    out.stderr_ = std::nan("");
    return out;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / out.n;
  if (out.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stderr_ = std::sqrt(ss / (out.n - 1)) / std::sqrt(static_cast<double>(out.n));
  }
  return out;
}

std::vector<double> ExperimentResult::means(const std::string& solver,
                                            const std::string& metric) const {
  std::vector<double> out;
  for (std::size_t p = 0; p < sweep_values.size(); ++p) {
    out.push_back(summary(p, solver, metric).mean);
  }
  return out;
}

std::string raw_path(const std::string& path) {
  const std::filesystem::path p(path);
  auto name = p.stem().string() + "_raw" + p.extension().string();
  return (p.parent_path() / name).string();
}

void write_csv(const ExperimentResult& result, const std::string& path) {
  std::ostringstream os;
  os << "sweep_value,solver,metric,mean,stderr,n_realizations\n";
  for (std::size_t p = 0; p < result.sweep_values.size(); ++p) {
    for (const auto& solver : result.solvers) {
      for (const auto& metric : ExperimentResult::metrics()) {
        const auto s = result.summary(p, solver, metric);
        os << csv::number(result.sweep_values[p]) << ',' << solver << ',' << metric << ','
           << csv::number(s.mean) << ',' << csv::number(s.stderr_) << ',' << s.n << '\n';
      }
    }
  }
  csv::write_file(path, os.str());

  std::ostringstream raw;
  raw << "sweep_value,solver,realization,seed,status,admitted_pct,admitted_rounded_pct,"
         "channel_usage_pct,objective\n";
  for (const auto& r : result.records) {
    raw << csv::number(r.sweep_value) << ',' << r.solver << ',' << r.realization << ','
        << r.seed << ',' << r.status << ',' << csv::number(r.admitted_pct) << ','
        << csv::number(r.admitted_rounded_pct) << ',' << csv::number(r.channel_usage_pct)
        << ',' << csv::number(r.objective) << '\n';
  }
  csv::write_file(raw_path(path), raw.str());
}

}  // namespace hetra
