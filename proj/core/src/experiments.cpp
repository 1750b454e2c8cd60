#include "collideq/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "collideq/blp.hpp"
#include "collideq/errors.hpp"
#include "collideq/trajectories.hpp"

namespace collideq::experiments {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "setting", "omega",   "gamma",  "beta",  "dt",      "delta", "delta_units",
      "steps",   "t_final", "stride", "traj",  "seed",    "rho0",  "r",
      "dt0",     "halvings", "n_theta", "n_phi", "preset"};
  return keys;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s) {
  const std::string t = trim(s);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw InvalidParameter("not a number: '" + t + "'");
  }
  if (used != t.size()) throw InvalidParameter("not a number: '" + t + "'");
  return v;
}

std::uint64_t parse_unsigned(const std::string& s) {
  const std::string t = trim(s);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    // Accept integral values written in floating notation, e.g. 1e5.
    const double d = parse_double(t);
    if (d < 0.0 || d != std::floor(d) || d > 1.8e19) throw InvalidParameter("not a count: '" + t + "'");
    return static_cast<std::uint64_t>(d);
  }
  return v;
}

const std::string& require(const ParamMap& m, const std::string& key) {
  const auto it = m.find(key);
  if (it == m.end()) throw InvalidParameter("missing parameter '" + key + "'");
  return it->second;
}

double single(const ParamMap& m, const std::string& key) {
  const auto v = parse_values(require(m, key));
  if (v.size() != 1) throw InvalidParameter("'" + key + "' takes a single value");
  return v.front();
}

ParamMap command_defaults(Command cmd) {
  ParamMap m{{"omega", "1"}, {"gamma", "1"}, {"beta", "1"}, {"dt", "0.01"},
             {"delta", "0"}, {"delta_units", "rad"}, {"setting", "I"}};
  switch (cmd) {
    case Command::steady_state:
      m["setting"] = "I,II";
      break;
    case Command::dynamics:
      m["rho0"] = "excited";
      m["t_final"] = "10";
      m["stride"] = "1";
      break;
    case Command::heat:
      m["rho0"] = "excited";
      m["t_final"] = "10";
      m["stride"] = "1";
      break;
    case Command::blp:
      m["n_theta"] = "32";
      m["n_phi"] = "16";
      break;
    case Command::negativity:
      m["setting"] = "II";
      break;
    case Command::trajectories:
      m["setting"] = "II";
      m["rho0"] = "ground";
      m["steps"] = "100";
      m["traj"] = "10000";
      m["seed"] = "1";
      break;
    case Command::sweep:
      m["setting"] = "II";
      break;
    case Command::limit_scan:
      m["setting"] = "II";
      m["beta"] = "2";
      m["r"] = "0.1,5";
      m["dt0"] = "0.01";
      m["halvings"] = "4";
      m["delta_units"] = "half-pi";
      m.erase("dt");
      m.erase("delta");
      break;
  }
  return m;
}

DensityMatrix named_state(const std::string& name, double beta, double omega) {
  if (name == "excited" || name == "1") return excited_state();
  if (name == "ground" || name == "0") return ground_state();
  if (name == "mixed") return maximally_mixed(QubitRegister{"S"});
  if (name == "gibbs") return gibbs_qubit(beta, omega);
  throw InvalidParameter("unknown rho0 '" + name + "' (excited, ground, mixed, gibbs)");
}

// Runs fn(i) for i in [0, n) on a small pool; results land by index.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(n, default_thread_count());
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  if (workers <= 1) {
    work();
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
}

std::string status_of(const std::exception& e) {
  std::string msg = e.what();
  std::replace(msg.begin(), msg.end(), ',', ';');
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  if (const auto* nu = dynamic_cast<const NonUniqueSteadyState*>(&e)) {
    return "non_unique_steady_state:" + std::to_string(nu->multiplicity());
  }
  return "error:" + msg;
}

struct Row {
  std::vector<std::string> fields;
  std::string status = "ok";
};

class CsvTable {
 public:
  CsvTable(const ExperimentSpec& spec, std::vector<std::string> columns)
      : spec_(spec), columns_(std::move(columns)) {}

  void add(Row row) { rows_.push_back(std::move(row)); }
  void resize(std::size_t n) { rows_.resize(n); }
  Row& at(std::size_t i) { return rows_[i]; }
  void add_summary(const std::string& key, const std::string& value) { summary_.emplace_back(key, value); }

  RunResult finish() const {
    std::ostringstream out;
    out << "# collideq_version=0.1.0\n";
    out << "# command=" << to_string(spec_.command) << '\n';
    for (const auto& [k, v] : spec_.resolved) out << "# " << k << '=' << v << '\n';
    for (std::size_t c = 0; c < columns_.size(); ++c) out << columns_[c] << ',';
    out << "status\n";
    RunResult res;
    for (const auto& r : rows_) {
      // Failed rows leave their trailing columns empty.
      for (std::size_t c = 0; c < columns_.size(); ++c) out << (c < r.fields.size() ? r.fields[c] : "") << ',';
      out << r.status << '\n';
      ++res.rows;
      if (r.status != "ok") ++res.flagged;
    }
    for (const auto& [k, v] : summary_) out << "# summary " << k << '=' << v << '\n';
    res.csv = out.str();
    return res;
  }

 private:
  const ExperimentSpec& spec_;
  std::vector<std::string> columns_;
  std::vector<Row> rows_;
  std::vector<std::pair<std::string, std::string>> summary_;
};

std::string fmt(double x) { return format_double(x); }

ModelConfig make_config(const ExperimentSpec& s, Setting setting, double beta, double dt, double delta) {
  ModelConfig cfg;
  cfg.omega = s.omega;
  cfg.gamma = s.gamma;
  cfg.beta = beta;
  cfg.dt = dt;
  cfg.delta = s.delta_radians(delta);
  cfg.setting = setting;
  cfg.validate();
  return cfg;
}

std::size_t steps_for(const ExperimentSpec& s, double dt) {
  if (s.steps) return *s.steps;
  return static_cast<std::size_t>(std::llround(s.t_final / dt));
}

// Grid (setting, β, Δt, δ) in iteration order.
struct GridPoint {
  Setting setting;
  double beta, dt, delta;
};

std::vector<GridPoint> product_grid(const ExperimentSpec& s) {
  std::vector<GridPoint> g;
  for (Setting st : s.settings)
    for (double b : s.betas)
      for (double dt : s.dts)
        for (double d : s.deltas) g.push_back({st, b, dt, d});
  return g;
}

std::vector<std::string> point_fields(const GridPoint& p) {
  return {to_string(p.setting), fmt(p.beta), fmt(p.dt), fmt(p.delta)};
}

struct SteadyInfo {
  DensityMatrix compound;
  EffectiveTemperature te;
  HeatFlux flux;
};

SteadyInfo steady_info(const ModelConfig& cfg) {
  const CollisionModel model(cfg);
  DensityMatrix ss = steady_state(model.channel());
  const DensityMatrix rho_s = partial_trace(ss, {"S"});
  const EffectiveTemperature te = effective_temperature(rho_s, cfg.omega);
  HeatFlux flux = steady_heat_flux(model, ss);
  return SteadyInfo{std::move(ss), te, std::move(flux)};
}

double delta_beta_of(const EffectiveTemperature& te, double beta) {
  if (std::isinf(beta) && te.beta_e == beta) return 0.0;
  if (!te.valid && std::isinf(te.beta_e)) return te.beta_e;
  return te.beta_e - beta;
}

struct Negativities {
  double n3 = std::numeric_limits<double>::quiet_NaN();
  double s_m0 = std::numeric_limits<double>::quiet_NaN();
  double s_m1 = std::numeric_limits<double>::quiet_NaN();
  double m0_m1 = std::numeric_limits<double>::quiet_NaN();
};

Negativities negativities_of(const DensityMatrix& compound, Setting setting) {
  Negativities n;
  if (setting == Setting::I) {
    n.s_m0 = negativity_2(compound);
    return n;
  }
  n.n3 = tripartite_negativity(compound);
  n.s_m0 = negativity_2(partial_trace(compound, {"S", "M0"}));
  n.s_m1 = negativity_2(partial_trace(compound, {"S", "M1"}));
  n.m0_m1 = negativity_2(partial_trace(compound, {"M0", "M1"}));
  return n;
}

RunResult run_steady_state(const ExperimentSpec& s) {
  CsvTable t(s, {"setting", "beta", "dt", "delta", "g_e", "beta_e", "delta_beta", "heat_flux",
                 "heat_flux_1"});
  const auto grid = product_grid(s);
  t.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const GridPoint& p = grid[i];
    Row& row = t.at(i);
    row.fields = point_fields(p);
    try {
      const auto info = steady_info(make_config(s, p.setting, p.beta, p.dt, p.delta));
      const double q1 = info.flux.per_bath.size() > 1 ? info.flux.per_bath[1]
                                                      : std::numeric_limits<double>::quiet_NaN();
      for (double v : {info.te.g_e, info.te.beta_e, delta_beta_of(info.te, p.beta),
                       info.flux.per_bath[0], q1})
        row.fields.push_back(fmt(v));
    } catch (const std::exception& e) {
      row.status = status_of(e);
    }
  });
  return t.finish();
}

// Δt and δ lists are paired element-wise; a single value broadcasts.
std::vector<std::pair<double, double>> paired(const ExperimentSpec& s) {
  const std::size_t n = std::max(s.dts.size(), s.deltas.size());
  if ((s.dts.size() != 1 && s.dts.size() != n) || (s.deltas.size() != 1 && s.deltas.size() != n)) {
    throw InvalidParameter("dt and delta lists must have equal length (or one value)");
  }
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.emplace_back(s.dts[s.dts.size() == 1 ? 0 : i], s.deltas[s.deltas.size() == 1 ? 0 : i]);
  }
  return out;
}

RunResult run_dynamics(const ExperimentSpec& s) {
  CsvTable t(s, {"setting", "beta", "dt", "delta", "step", "t", "one_minus_F", "beta_e"});
  for (Setting st : s.settings) {
    for (double beta : s.betas) {
      for (const auto& [dt, delta] : paired(s)) {
        const ModelConfig cfg = make_config(s, st, beta, dt, delta);
        const auto samples = evolve(cfg, named_state(s.rho0, beta, s.omega), steps_for(s, dt));
        for (const auto& smp : samples) {
          if (smp.step % s.stride != 0 && smp.step + 1 != samples.size()) continue;
          Row row;
          row.fields = point_fields({st, beta, dt, delta});
          row.fields.push_back(std::to_string(smp.step));
          row.fields.push_back(fmt(smp.t));
          row.fields.push_back(fmt(1.0 - smp.fidelity_to_gibbs));
          row.fields.push_back(fmt(smp.beta_e.beta_e));
          t.add(std::move(row));
        }
      }
    }
  }
  return t.finish();
}

RunResult run_heat(const ExperimentSpec& s) {
  CsvTable t(s, {"setting", "beta", "dt", "delta", "step", "t", "bath", "q_sa", "q_intra_in",
                 "q_intra_out", "q_lifecycle"});
  for (Setting st : s.settings) {
    for (double beta : s.betas) {
      for (const auto& [dt, delta] : paired(s)) {
        const ModelConfig cfg = make_config(s, st, beta, dt, delta);
        const auto samples = evolve(cfg, named_state(s.rho0, beta, s.omega), steps_for(s, dt));
        for (const auto& smp : samples) {
          if (smp.step == 0) continue;
          if (smp.step % s.stride != 0 && smp.step + 1 != samples.size()) continue;
          for (const auto& h : smp.heat) {
            Row row;
            row.fields = point_fields({st, beta, dt, delta});
            row.fields.push_back(std::to_string(smp.step));
            row.fields.push_back(fmt(smp.t));
            row.fields.push_back(std::to_string(h.bath));
            for (double v : {h.q_sa, h.q_intra_in, h.q_intra_out, h.q_lifecycle}) row.fields.push_back(fmt(v));
            t.add(std::move(row));
          }
        }
      }
    }
  }
  return t.finish();
}

RunResult run_blp(const ExperimentSpec& s) {
  CsvTable t(s, {"setting", "beta", "dt", "delta", "blp_value", "theta_opt", "phi_opt", "n_steps"});
  const auto grid = product_grid(s);
  t.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const GridPoint& p = grid[i];
    Row& row = t.at(i);
    row.fields = point_fields(p);
    try {
      const ModelConfig cfg = make_config(s, p.setting, p.beta, p.dt, p.delta);
      const std::size_t n = s.steps ? *s.steps : default_blp_horizon(cfg);
      const BlpResult r = blp_measure(cfg, n, BlochGrid{s.n_theta, s.n_phi});
      for (double v : {r.value, r.theta, r.phi}) row.fields.push_back(fmt(v));
      row.fields.push_back(std::to_string(n));
      if (!r.converged) row.status = "unconverged";
    } catch (const std::exception& e) {
      row.status = status_of(e);
    }
  });
  return t.finish();
}

RunResult run_negativity(const ExperimentSpec& s) {
  CsvTable t(s, {"setting", "beta", "dt", "delta", "N3", "N2_S_M0", "N2_S_M1", "N2_M0_M1"});
  const auto grid = product_grid(s);
  t.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const GridPoint& p = grid[i];
    Row& row = t.at(i);
    row.fields = point_fields(p);
    try {
      const ModelConfig cfg = make_config(s, p.setting, p.beta, p.dt, p.delta);
      const Negativities n = negativities_of(steady_state(embedded_step_channel(cfg)), p.setting);
      for (double v : {n.n3, n.s_m0, n.s_m1, n.m0_m1}) row.fields.push_back(fmt(v));
    } catch (const std::exception& e) {
      row.status = status_of(e);
    }
  });
  return t.finish();
}

RunResult run_sweep(const ExperimentSpec& s) {
  CsvTable t(s, {"setting", "beta", "dt", "delta", "delta_beta", "heat_flux", "N3", "N2_S_M0",
                 "N2_S_M1", "N2_M0_M1"});
  const auto grid = product_grid(s);
  t.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const GridPoint& p = grid[i];
    Row& row = t.at(i);
    row.fields = point_fields(p);
    try {
      const auto info = steady_info(make_config(s, p.setting, p.beta, p.dt, p.delta));
      const Negativities n = negativities_of(info.compound, p.setting);
      for (double v : {delta_beta_of(info.te, p.beta), info.flux.per_bath[0], n.n3, n.s_m0, n.s_m1,
                       n.m0_m1})
        row.fields.push_back(fmt(v));
    } catch (const std::exception& e) {
      row.status = status_of(e);
    }
  });
  return t.finish();
}

RunResult run_trajectories(const ExperimentSpec& s) {
  CsvTable t(s, {"setting", "beta", "dt", "delta", "traj", "bath", "step", "t", "mean_stoch_heat",
                 "std_error", "unconditional_heat"});
  for (Setting st : s.settings) {
    for (double beta : s.betas) {
      for (const auto& [dt, delta] : paired(s)) {
        const ModelConfig cfg = make_config(s, st, beta, dt, delta);
        const DensityMatrix rho0 = named_state(s.rho0, beta, s.omega);
        const std::size_t n = steps_for(s, dt);
        const auto uncond = evolve(cfg, rho0, n);
        for (std::size_t m : s.trajectories) {
          const EnsembleStats stats = ensemble_mean_heat(cfg, rho0, n, m, s.master_seed);
          for (std::size_t b = 0; b < cfg.bath_count(); ++b) {
            std::size_t covered = 0;
            double abs_dev = 0.0;
            for (std::size_t k = 1; k <= n; ++k) {
              const double mean = stats.mean(k, b), se = stats.se(k, b);
              const double ref = uncond[k].heat[b].q_lifecycle;
              const double dev = std::abs(mean - ref);
              abs_dev += dev;
              // Zero-variance steps are deterministic; they count as covered
              // when the mean is exact.
              if (dev < 3.0 * se || dev <= 1e-12) ++covered;
              if (k % s.stride != 0 && k != n) continue;
              Row row;
              row.fields = point_fields({st, beta, dt, delta});
              row.fields.push_back(std::to_string(m));
              row.fields.push_back(std::to_string(b));
              row.fields.push_back(std::to_string(k));
              row.fields.push_back(fmt(static_cast<double>(k) * dt));
              for (double v : {mean, se, ref}) row.fields.push_back(fmt(v));
              t.add(std::move(row));
            }
            const std::string tag = to_string(st) + "_beta" + fmt(beta) + "_dt" + fmt(dt) + "_delta" +
                                    fmt(delta) + "_traj" + std::to_string(m) + "_bath" + std::to_string(b);
            t.add_summary("coverage_" + tag, fmt(static_cast<double>(covered) / static_cast<double>(n)));
            t.add_summary("mean_abs_dev_" + tag, fmt(abs_dev / static_cast<double>(n)));
          }
        }
      }
    }
  }
  return t.finish();
}

RunResult run_limit_scan(const ExperimentSpec& s) {
  CsvTable t(s, {"setting", "beta", "r", "dt", "delta", "delta_beta"});
  struct Point {
    Setting setting;
    double beta, r, dt;
  };
  std::vector<Point> grid;
  for (Setting st : s.settings)
    for (double beta : s.betas)
      for (double r : s.ratios)
        for (std::size_t k = 0; k < s.halvings; ++k) grid.push_back({st, beta, r, s.dt0 / std::ldexp(1.0, static_cast<int>(k))});
  t.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const Point& p = grid[i];
    Row& row = t.at(i);
    // δ → 1 is read in the configured units: 1 means π/2 for half-pi.
    const double delta = 1.0 - p.dt / p.r;
    row.fields = {to_string(p.setting), fmt(p.beta), fmt(p.r), fmt(p.dt), fmt(delta)};
    const double rad = s.delta_radians(delta);
    if (!(rad >= 0.0 && rad < kHalfPi)) {
      row.status = "skipped_delta_out_of_range";
      return;
    }
    try {
      const auto info = steady_info(make_config(s, p.setting, p.beta, p.dt, delta));
      row.fields.push_back(fmt(delta_beta_of(info.te, p.beta)));
    } catch (const std::exception& e) {
      row.status = status_of(e);
    }
  });
  return t.finish();
}

}  // namespace

Command parse_command(std::string_view name) {
  const auto& names = command_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<Command>(i);
  }
  throw InvalidParameter("unknown command '" + std::string(name) + "'");
}

std::string to_string(Command c) { return command_names().at(static_cast<std::size_t>(c)); }

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"steady-state", "dynamics", "heat",  "blp",
                                              "negativity",   "trajectories", "sweep", "limit-scan"};
  return names;
}

std::vector<double> parse_values(std::string_view text) {
  const std::string t = trim(text);
  if (t.empty()) throw InvalidParameter("empty value list");
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    if (parts.size() != 3) throw InvalidParameter("grid must be a:b:n, got '" + t + "'");
    const double a = parse_double(parts[0]), b = parse_double(parts[1]);
    const auto n = static_cast<std::size_t>(parse_unsigned(parts[2]));
    if (n == 0) throw InvalidParameter("grid needs n >= 1");
    if (n == 1) return {a};
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    v.back() = b;
    return v;
  }
  std::vector<double> v;
  for (const auto& p : split(t, ',')) v.push_back(parse_double(p));
  return v;
}

std::vector<Setting> parse_settings(std::string_view text) {
  std::vector<Setting> out;
  for (const auto& p : split(text, ',')) {
    if (p == "I" || p == "1") {
      out.push_back(Setting::I);
    } else if (p == "II" || p == "2") {
      out.push_back(Setting::II);
    } else {
      throw InvalidParameter("setting must be I or II, got '" + p + "'");
    }
  }
  return out;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig2", "fig3", "fig4", "fig5", "limit"};
  return names;
}

ParamMap preset_params(std::string_view name, Command cmd) {
  ParamMap m{{"preset", std::string(name)}, {"omega", "1"}, {"gamma", "1"}};
  if (name == "fig2") {
    // Markovian steady states against Δt; the Δt range is a choice, (0, 0.5].
    m["setting"] = "I,II";
    m["beta"] = "0.5,2";
    m["dt"] = "0.025:0.5:20";
    m["delta"] = "0";
  } else if (name == "fig3") {
    m["setting"] = "I,II";
    m["beta"] = "2";
    m["delta_units"] = "half-pi";
    if (cmd == Command::blp) {
      // Long enough for every pair to decay below 1e-6 at δ ≤ 0.95.
      m["dt"] = "0.01";
      m["delta"] = "0:0.95:20";
      m["steps"] = "20000";
    } else {
      m["dt"] = "0.01,0.01,0.001";
      m["delta"] = "0.95,0.8,0.95";
      m["rho0"] = "excited";
      m["t_final"] = "10";
    }
  } else if (name == "fig4") {
    m["setting"] = "II";
    m["beta"] = "0.5,2";
    m["dt"] = "0.01:0.5:20";
    m["delta"] = "0:0.98:20";
    m["delta_units"] = "half-pi";
  } else if (name == "fig5") {
    m["setting"] = "II";
    m["beta"] = "1";
    m["dt"] = "0.1";
    m["delta"] = "0.95";
    m["delta_units"] = "half-pi";
    m["steps"] = "100";
    m["traj"] = "10000,100000";
    m["rho0"] = "ground";
    m["seed"] = "1";
  } else if (name == "limit") {
    m["setting"] = "II";
    m["beta"] = "2";
    m["r"] = "0.1,5";
    m["dt0"] = "0.01";
    m["halvings"] = "4";
    m["delta_units"] = "half-pi";
  } else {
    throw InvalidParameter("unknown preset '" + std::string(name) + "'");
  }
  return m;
}

ParamMap read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  ParamMap m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InvalidParameter(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::replace(key.begin(), key.end(), '-', '_');
    m[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return m;
}

double ExperimentSpec::delta_radians(double delta) const {
  return delta_units == DeltaUnits::half_pi ? delta * kHalfPi : delta;
}

ExperimentSpec resolve_spec(Command cmd, const ParamMap& flags) {
  ParamMap config;
  if (const auto it = flags.find("config"); it != flags.end()) config = read_config_file(it->second);

  ParamMap merged = command_defaults(cmd);
  std::string preset;
  if (const auto it = config.find("preset"); it != config.end()) preset = it->second;
  if (const auto it = flags.find("preset"); it != flags.end()) preset = it->second;
  if (!preset.empty()) {
    for (auto& [k, v] : preset_params(preset, cmd)) merged[k] = v;
  }
  std::string out_path;
  for (const ParamMap* layer : {static_cast<const ParamMap*>(&config), &flags}) {
    for (const auto& [k, v] : *layer) {
      if (k == "config") continue;
      if (k == "out") {
        out_path = v;
        continue;
      }
      if (!known_keys().count(k)) throw InvalidParameter("unknown parameter '" + k + "'");
      merged[k] = v;
    }
  }
  // An explicit step count overrides the time span.
  if (merged.count("steps")) merged.erase("t_final");

  ExperimentSpec s;
  s.command = cmd;
  s.output_path = out_path;
  s.settings = parse_settings(require(merged, "setting"));
  s.omega = single(merged, "omega");
  s.gamma = single(merged, "gamma");
  s.betas = parse_values(require(merged, "beta"));
  const std::string units = require(merged, "delta_units");
  if (units == "rad") {
    s.delta_units = DeltaUnits::rad;
  } else if (units == "half-pi" || units == "half_pi") {
    s.delta_units = DeltaUnits::half_pi;
  } else {
    throw InvalidParameter("delta_units must be rad or half-pi");
  }
  if (cmd == Command::limit_scan) {
    merged.erase("dt");
    merged.erase("delta");
    s.ratios = parse_values(require(merged, "r"));
    for (double r : s.ratios) {
      if (!(r > 0.0)) throw InvalidParameter("r must be positive");
    }
    s.dt0 = single(merged, "dt0");
    if (!(s.dt0 > 0.0)) throw InvalidParameter("dt0 must be positive");
    s.halvings = parse_unsigned(require(merged, "halvings"));
    if (s.halvings == 0) throw InvalidParameter("halvings must be at least 1");
  } else {
    s.dts = parse_values(require(merged, "dt"));
    s.deltas = parse_values(require(merged, "delta"));
  }
  if (merged.count("steps")) s.steps = parse_unsigned(merged.at("steps"));
  if (merged.count("t_final")) s.t_final = single(merged, "t_final");
  if (merged.count("stride")) {
    s.stride = parse_unsigned(merged.at("stride"));
    if (s.stride == 0) throw InvalidParameter("stride must be at least 1");
  }
  if (merged.count("traj")) {
    for (double m : parse_values(merged.at("traj"))) {
      if (!(m >= 1.0) || m != std::floor(m)) throw InvalidParameter("traj must be positive integers");
      s.trajectories.push_back(static_cast<std::size_t>(m));
    }
  }
  if (merged.count("seed")) s.master_seed = parse_unsigned(merged.at("seed"));
  if (merged.count("rho0")) s.rho0 = merged.at("rho0");
  if (merged.count("n_theta")) s.n_theta = parse_unsigned(merged.at("n_theta"));
  if (merged.count("n_phi")) s.n_phi = parse_unsigned(merged.at("n_phi"));

  // Keys that the command never reads are dropped from the echo.
  static const std::map<Command, std::set<std::string>> unused{
      {Command::steady_state, {"steps", "t_final", "stride", "traj", "seed", "rho0", "r", "dt0", "halvings", "n_theta", "n_phi"}},
      {Command::dynamics, {"traj", "seed", "r", "dt0", "halvings", "n_theta", "n_phi"}},
      {Command::heat, {"traj", "seed", "r", "dt0", "halvings", "n_theta", "n_phi"}},
      {Command::blp, {"t_final", "stride", "traj", "seed", "rho0", "r", "dt0", "halvings"}},
      {Command::negativity, {"steps", "t_final", "stride", "traj", "seed", "rho0", "r", "dt0", "halvings", "n_theta", "n_phi"}},
      {Command::trajectories, {"r", "dt0", "halvings", "n_theta", "n_phi"}},
      {Command::sweep, {"steps", "t_final", "stride", "traj", "seed", "rho0", "r", "dt0", "halvings", "n_theta", "n_phi"}},
      {Command::limit_scan, {"steps", "t_final", "stride", "traj", "seed", "rho0", "n_theta", "n_phi"}},
  };
  for (const auto& k : unused.at(cmd)) merged.erase(k);
  s.resolved = std::move(merged);
  return s;
}

RunResult run_experiment(const ExperimentSpec& spec) {
  switch (spec.command) {
    case Command::steady_state: return run_steady_state(spec);
    case Command::dynamics: return run_dynamics(spec);
    case Command::heat: return run_heat(spec);
    case Command::blp: return run_blp(spec);
    case Command::negativity: return run_negativity(spec);
    case Command::trajectories: return run_trajectories(spec);
    case Command::sweep: return run_sweep(spec);
    case Command::limit_scan: return run_limit_scan(spec);
  }
  throw InvalidParameter("unhandled command");
}

}  // namespace collideq::experiments
