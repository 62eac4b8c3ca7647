#include "hetra/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace hetra {

double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

int Scenario::num_sues() const {
  int total = 0;
  for (const auto& cell : sues) total += static_cast<int>(cell.size());
  return total;
}

int Scenario::sue_index(int s, int f) const {
  int offset = 0;
  for (int c = 0; c < s; ++c) offset += sues_in(c);
  return offset + f;
}

double Scenario::default_epsilon() const {
  return 0.9 / (1.0 + static_cast<double>(num_cells()) * num_channels);
}

void Scenario::validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("invalid scenario: " + what);
  };
  if (num_channels < 1) fail("num_channels must be >= 1");
  if (!(macro_radius > 0)) fail("macro_radius must be positive");
  if (!(delta_f > 0)) fail("delta_f must be positive");
  if (!(p_macro_max > 0)) fail("p_macro_max must be positive");
  if (!(p_small_max > 0)) fail("p_small_max must be positive");
  if (!(noise > 0)) fail("noise must be positive");
  if (!(i_max > 0)) fail("i_max must be positive");
  if (!std::isfinite(wall_loss_db)) fail("wall_loss_db must be finite");
  if (sues.size() != small_cells.size()) {
    fail("sue lists must match the number of small cells");
  }
  if (static_cast<int>(rate_mue.size()) != num_mues()) {
    fail("rate_mue needs one entry per MUE");
  }
  if (static_cast<int>(rate_sue.size()) != num_sues()) {
    fail("rate_sue needs one entry per SUE");
  }
  for (double r : rate_mue) {
    if (!(r > 0)) fail("MUE rates must be positive");
  }
  for (double r : rate_sue) {
    if (!(r > 0)) fail("SUE rates must be positive");
  }
  if (!(epsilon > 0 && epsilon < 1)) fail("epsilon must lie in (0, 1)");
  const double bound = 1.0 / (1.0 + static_cast<double>(num_cells()) * num_channels);
  if (!(epsilon < bound)) {
    fail("epsilon must be below 1 / (1 + S N) = " + std::to_string(bound));
  }
}

double path_loss_db(LinkKind kind, double distance_m, double wall_loss_db) {
  const double d = std::max(distance_m, 1.0);
  const double indoor = 38.46 + 20.0 * std::log10(d);
  const double outdoor = 15.3 + 37.6 * std::log10(d);
  switch (kind) {
    case LinkKind::kSmallToSue:
      return indoor;
    case LinkKind::kSmallToMue:
      return std::max(indoor, outdoor) + wall_loss_db;
    case LinkKind::kMacroToSue:
      return outdoor + wall_loss_db;
    case LinkKind::kMacroToMue:
      return outdoor;
  }
  return outdoor;
}

double shadowing_sigma_db(LinkKind kind) {
  switch (kind) {
    case LinkKind::kSmallToSue:
      return 4.0;
    case LinkKind::kSmallToMue:
      return 8.0;
    case LinkKind::kMacroToSue:
    case LinkKind::kMacroToMue:
      return 10.0;
  }
  return 10.0;
}

void ChannelGains::validate(const Scenario& scenario) const {
  const int n = scenario.num_channels;
  auto check = [&](const Eigen::MatrixXd& g, int rows, const char* name) {
    if (g.rows() != rows || g.cols() != n) {
      throw std::invalid_argument(std::string("gain block ") + name +
                                  " has wrong dimensions");
    }
    for (int i = 0; i < g.size(); ++i) {
      const double v = g.data()[i];
      if (!std::isfinite(v) || !(v > 0)) {
        throw std::invalid_argument(std::string("gain block ") + name +
                                    " has a non-positive or non-finite entry");
      }
    }
  };
  check(macro_mue, scenario.num_mues(), "macro_mue");
  check(macro_sue, scenario.num_sues(), "macro_sue");
  if (static_cast<int>(small_sue.size()) != scenario.num_cells() ||
      static_cast<int>(small_mue.size()) != scenario.num_cells()) {
    throw std::invalid_argument("per-cell gain blocks must match the cell count");
  }
  for (int s = 0; s < scenario.num_cells(); ++s) {
    check(small_sue[s], scenario.sues_in(s), "small_sue");
    check(small_mue[s], scenario.num_mues(), "small_mue");
  }
}

namespace {

class LinkSampler {
 public:
  LinkSampler(std::uint64_t seed, const GainOptions& options, double wall_loss)
      : engine_(seed), options_(options), wall_loss_(wall_loss) {}

  void fill_row(LinkKind kind, double dist, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) {
    const double pl = path_loss_db(kind, dist, wall_loss_);
    std::normal_distribution<double> shadow(0.0, shadowing_sigma_db(kind));
    std::exponential_distribution<double> fading(1.0);
    for (Eigen::Index n = 0; n < row.size(); ++n) {
      // Both draws are always taken so switching an option off keeps the
      // stream aligned.
      const double x = shadow(engine_);
      const double h = fading(engine_);
      const double loss = pl + (options_.shadowing ? x : 0.0);
      row[n] = std::pow(10.0, -loss / 10.0) * (options_.fading ? h : 1.0);
    }
  }

 private:
  Rng engine_;
  GainOptions options_;
  double wall_loss_;
};

}  // namespace

ChannelGains realize_gains(const Scenario& scenario, Rng& rng,
                           const GainOptions& options) {
  const int n = scenario.num_channels;
  const int m_count = scenario.num_mues();
  const int s_count = scenario.num_cells();

  LinkSampler macro_mue(rng(), options, scenario.wall_loss_db);
  LinkSampler macro_sue(rng(), options, scenario.wall_loss_db);
  LinkSampler small_sue(rng(), options, scenario.wall_loss_db);
  LinkSampler small_mue(rng(), options, scenario.wall_loss_db);

  ChannelGains g;
  g.macro_mue.resize(m_count, n);
  for (int m = 0; m < m_count; ++m) {
    macro_mue.fill_row(LinkKind::kMacroToMue,
                       distance(scenario.macro_position, scenario.mues[m]),
                       g.macro_mue.row(m));
  }
  g.macro_sue.resize(scenario.num_sues(), n);
  g.small_sue.resize(s_count);
  for (int s = 0; s < s_count; ++s) {
    g.small_sue[s].resize(scenario.sues_in(s), n);
    for (int f = 0; f < scenario.sues_in(s); ++f) {
      const Point& ue = scenario.sues[s][f];
      macro_sue.fill_row(LinkKind::kMacroToSue,
                         distance(scenario.macro_position, ue),
                         g.macro_sue.row(scenario.sue_index(s, f)));
      small_sue.fill_row(LinkKind::kSmallToSue,
                         distance(scenario.small_cells[s], ue),
                         g.small_sue[s].row(f));
    }
  }
  // MUE-major so that cell s, MUE m uses the same draws whatever M is.
  g.small_mue.assign(s_count, Eigen::MatrixXd(m_count, n));
  for (int m = 0; m < m_count; ++m) {
    for (int s = 0; s < s_count; ++s) {
      small_mue.fill_row(LinkKind::kSmallToMue,
                         distance(scenario.small_cells[s], scenario.mues[m]),
                         g.small_mue[s].row(m));
    }
  }
  return g;
}

double sinr_macro(double power, double gain, double interference, double noise) {
  return power * gain / (interference + noise);
}

double sinr_sue(double power, double gain_own, double macro_interference,
                double noise) {
  return power * gain_own / (macro_interference + noise);
}

Scenario build_scenario(const ScenarioConfig& config, Rng& rng) {
  const Topology& topo = config.topology;
  const RadioParams& radio = config.radio;
  Scenario sc;
  sc.macro_position = topo.macro_position;
  sc.macro_radius = topo.macro_radius;
  sc.hotspot_center = topo.hotspot_center;
  sc.hotspot_side = topo.hotspot_side;
  sc.small_cells = topo.small_cells;

  // Separate substreams keep MUE and SUE placement independent of each
  // other's counts.
  Rng mue_rng(rng());
  Rng sue_rng(rng());

  if (!topo.mue_positions.empty()) {
    sc.mues = topo.mue_positions;
  } else {
    std::uniform_real_distribution<double> u(-0.5 * topo.hotspot_side,
                                             0.5 * topo.hotspot_side);
    for (int m = 0; m < topo.num_mues; ++m) {
      const double dx = u(mue_rng);
      const double dy = u(mue_rng);
      sc.mues.push_back({topo.hotspot_center.x + dx, topo.hotspot_center.y + dy});
    }
  }

  if (!topo.sue_positions.empty()) {
    if (topo.sue_positions.size() != topo.small_cells.size()) {
      throw std::invalid_argument("sue_positions must list one group per cell");
    }
    sc.sues = topo.sue_positions;
  } else {
    const double r2_lo = topo.sue_inner_radius * topo.sue_inner_radius;
    const double r2_hi = topo.sue_outer_radius * topo.sue_outer_radius;
    std::uniform_real_distribution<double> radius2(r2_lo, r2_hi);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    sc.sues.resize(topo.small_cells.size());
    for (std::size_t s = 0; s < topo.small_cells.size(); ++s) {
      for (int f = 0; f < topo.sues_per_cell; ++f) {
        const double r = std::sqrt(radius2(sue_rng));
        const double a = angle(sue_rng);
        sc.sues[s].push_back({topo.small_cells[s].x + r * std::cos(a),
                              topo.small_cells[s].y + r * std::sin(a)});
      }
    }
  }

  sc.num_channels = radio.num_channels;
  sc.delta_f = radio.delta_f;
  sc.p_macro_max = radio.p_macro_max;
  sc.p_small_max = radio.p_small_max;
  sc.noise = radio.noise;
  sc.wall_loss_db = radio.wall_loss_db;
  sc.rate_mue.assign(sc.mues.size(), radio.rate_mue);
  sc.rate_sue.assign(static_cast<std::size_t>(sc.num_sues()), radio.rate_sue);
  sc.i_max = radio.i_max;
  sc.epsilon = radio.epsilon > 0 ? radio.epsilon : sc.default_epsilon();
  sc.rng_seed = config.seed;
  sc.validate();
  return sc;
}

namespace {

using nlohmann::json;

Point to_point(const json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw std::invalid_argument("expected a point as [x, y], got " + j.dump());
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Point> to_points(const json& j) {
  std::vector<Point> out;
  for (const auto& p : j) out.push_back(to_point(p));
  return out;
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ScenarioConfig parse_scenario_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  ScenarioConfig cfg;
  try {
    if (root.contains("topology")) {
      const json& t = root["topology"];
      Topology& topo = cfg.topology;
      if (t.contains("macro_position")) topo.macro_position = to_point(t["macro_position"]);
      read_opt(t, "macro_radius", topo.macro_radius);
      if (t.contains("hotspot_center")) topo.hotspot_center = to_point(t["hotspot_center"]);
      read_opt(t, "hotspot_side", topo.hotspot_side);
      if (t.contains("small_cells")) topo.small_cells = to_points(t["small_cells"]);
      read_opt(t, "sues_per_cell", topo.sues_per_cell);
      read_opt(t, "num_mues", topo.num_mues);
      if (t.contains("sue_annulus")) {
        topo.sue_inner_radius = t["sue_annulus"].at(0).get<double>();
        topo.sue_outer_radius = t["sue_annulus"].at(1).get<double>();
      }
      if (t.contains("mue_positions")) {
        topo.mue_positions = to_points(t["mue_positions"]);
        topo.num_mues = static_cast<int>(topo.mue_positions.size());
      }
      if (t.contains("sue_positions")) {
        for (const auto& group : t["sue_positions"]) {
          topo.sue_positions.push_back(to_points(group));
        }
      }
    }
    if (root.contains("radio")) {
      const json& r = root["radio"];
      RadioParams& radio = cfg.radio;
      read_opt(r, "num_channels", radio.num_channels);
      read_opt(r, "delta_f", radio.delta_f);
      read_opt(r, "p_macro_max", radio.p_macro_max);
      read_opt(r, "p_small_max", radio.p_small_max);
      read_opt(r, "noise", radio.noise);
      read_opt(r, "wall_loss_db", radio.wall_loss_db);
      read_opt(r, "rate_mue", radio.rate_mue);
      read_opt(r, "rate_sue", radio.rate_sue);
      read_opt(r, "i_max", radio.i_max);
      read_opt(r, "epsilon", radio.epsilon);
    }
    read_opt(root, "seed", cfg.seed);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config schema error: ") + e.what());
  }
  return cfg;
}

ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_config(buf.str());
}

}  // namespace hetra
