#include "mhdlag/cli.hpp"

#include "mhdlag/parallel.hpp"
#include "mhdlag/snapshot.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace mhdlag {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using std::numbers::pi;

namespace {

std::string num(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& v) {
  double x = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(x))
    throw std::invalid_argument("expected a number, got '" + v + "'");
  return x;
}

template <class Int>
Int to_int(const std::string& v) {
  Int x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw std::invalid_argument("expected an integer, got '" + v + "'");
  return x;
}

const std::set<std::string> scenarios{"zero", "ns-reduction", "small-mode", "polluted-divergence", "continuation"};

struct Key {
  ConfigKey info;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define DOUBLE_KEY(name, member, doc)                                                 \
  Key {                                                                               \
    {name, doc}, [](RunConfig& c, const std::string& v) { c.member = to_double(v); }, \
        [](const RunConfig& c) { return num(c.member); }                              \
  }
#define INT_KEY(name, member, type, doc)                                                   \
  Key {                                                                                    \
    {name, doc}, [](RunConfig& c, const std::string& v) { c.member = to_int<type>(v); }, \
        [](const RunConfig& c) { return std::to_string(c.member); }                        \
  }
#define STRING_KEY(name, member, doc)                                     \
  Key {                                                                   \
    {name, doc}, [](RunConfig& c, const std::string& v) { c.member = v; }, \
        [](const RunConfig& c) { return c.member; }                       \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table{
      Key{{"scenario", "zero | ns-reduction | small-mode | polluted-divergence | continuation"},
          [](RunConfig& c, const std::string& v) {
            if (!scenarios.count(v)) throw std::invalid_argument("unknown scenario '" + v + "'");
            c.scenario = v;
          },
          [](const RunConfig& c) { return c.scenario; }},
      INT_KEY("nx", grid.nx, int, "grid nodes in x (periodic)"),
      INT_KEY("ny", grid.ny, int, "grid nodes in y (periodic)"),
      INT_KEY("nz", grid.nz, int, "grid nodes in z including both faces"),
      DOUBLE_KEY("lx", grid.lx, "period in x"),
      DOUBLE_KEY("ly", grid.ly, "period in y"),
      DOUBLE_KEY("depth", grid.depth, "slab depth; the reference surface is z = 0"),
      DOUBLE_KEY("l", iteration.l, "regularity index in (1/2, 1)"),
      DOUBLE_KEY("nu", iteration.nu, "viscosity"),
      DOUBLE_KEY("lambda", iteration.lambda, "magnetic diffusivity"),
      DOUBLE_KEY("g_grav", iteration.g_grav, "gravity in the normal-stress condition"),
      DOUBLE_KEY("gamma", iteration.gamma, "exponential weight of the H_gamma norms"),
      DOUBLE_KEY("T", iteration.T, "time horizon, an integer multiple of dt"),
      DOUBLE_KEY("dt", iteration.dt, "time step"),
      INT_KEY("max_iters", iteration.max_iters, int, "iterate cap"),
      DOUBLE_KEY("contraction_tol", iteration.contraction_tol, "stop when Y_m < contraction_tol * Y_1"),
      DOUBLE_KEY("delta", iteration.delta, "smallness margin, below (sqrt(15) - 3) / 6"),
      DOUBLE_KEY("jac_floor", iteration.jac_floor, "smallest admissible Jacobian of the flow map"),
      DOUBLE_KEY("tol_compat", iteration.tol_compat, "compatibility tolerance"),
      INT_KEY("norm_stride", iteration.norm_stride, int, "time subsampling for iterate norms"),
      Key{{"bottom", "free_slip | no_slip"},
          [](RunConfig& c, const std::string& v) {
            if (v == "free_slip")
              c.iteration.bottom = BottomCondition::free_slip;
            else if (v == "no_slip")
              c.iteration.bottom = BottomCondition::no_slip;
            else
              throw std::invalid_argument("expected free_slip or no_slip, got '" + v + "'");
          },
          [](const RunConfig& c) {
            return std::string(c.iteration.bottom == BottomCondition::free_slip ? "free_slip" : "no_slip");
          }},
      INT_KEY("seed", seed, std::uint64_t, "seed of the probe fields"),
      STRING_KEY("out", out, "output directory"),
      INT_KEY("cadence", cadence, int, "snapshot every this many levels"),
      DOUBLE_KEY("amplitude", amplitude, "preset amplitude A"),
      DOUBLE_KEY("pollution", pollution, "polluted-divergence: div H0 mode is A * pollution"),
      DOUBLE_KEY("surface_amplitude", surface_amplitude, "h0 = surface_amplitude * cos(x + y)"),
      DOUBLE_KEY("eps0", eps0, "continuation threshold on the measured bound"),
      INT_KEY("probe_n", probe_n, int, "probe coarse grid n x n x (n + 1), refined to 2n"),
      DOUBLE_KEY("probe_T0", probe_T0, "largest probe time window"),
      INT_KEY("probe_levels", probe_levels, int, "time levels per probe window"),
      INT_KEY("probe_trials", probe_trials, int, "random field pairs"),
      STRING_KEY("initial_data", initial_data, "snapshot directory with v_*, B_*, h (replaces the preset)"),
  };
  return table;
}

#undef DOUBLE_KEY
#undef INT_KEY
#undef STRING_KEY

void validate_run(const RunConfig& c) {
  auto fail = [](const std::string& key, const std::string& why) { throw ConfigError(key + ": " + why); };
  if (c.grid.nx < 4) fail("nx", "must be at least 4");
  if (c.grid.ny < 4) fail("ny", "must be at least 4");
  if (c.grid.nz < 5) fail("nz", "must be at least 5");
  if (!(c.grid.lx > 0)) fail("lx", "must be positive");
  if (!(c.grid.ly > 0)) fail("ly", "must be positive");
  if (!(c.grid.depth > 0)) fail("depth", "must be positive");
  c.iteration.validate();
  if (c.cadence < 1) fail("cadence", "must be at least 1");
  if (c.workers < 1) fail("workers", "must be at least 1");
  if (!(c.amplitude >= 0)) fail("amplitude", "must be nonnegative");
  if (!(c.eps0 > 0)) fail("eps0", "must be positive");
  if (c.probe_n < 4) fail("probe_n", "must be at least 4");
  if (!(c.probe_T0 > 0)) fail("probe_T0", "must be positive");
  if (c.probe_levels < 3) fail("probe_levels", "must be at least 3");
  if (c.probe_trials < 0) fail("probe_trials", "must be nonnegative");
}

Grid run_grid(const RunConfig& c) {
  Grid g = c.grid;
  g.dt = c.iteration.dt;
  return g;
}

VectorField shear_velocity(const Grid& g, double A) {
  const double kx = 2 * pi / g.lx, ky = 2 * pi / g.ly, d = g.depth;
  auto p = [d](double z) { return 1 - (z / d) * (z / d); };
  return {ScalarField::sample(g, [&](double, double y, double z) { return A * std::sin(ky * y) * p(z); }),
          ScalarField::sample(g, [&](double x, double, double z) { return A * std::cos(kx * x) * p(z); }),
          ScalarField(g)};
}

VectorField wall_field(const Grid& g, double A, double pollution) {
  const double kx = 2 * pi / g.lx, ky = 2 * pi / g.ly, kz = pi / g.depth;
  return {ScalarField::sample(g,
                              [&](double x, double y, double z) {
                                return A * (std::cos(ky * y) + pollution * std::sin(kx * x)) * std::sin(kz * z);
                              }),
          ScalarField::sample(g, [&](double x, double, double z) { return A * std::sin(kx * x) * std::sin(kz * z); }),
          ScalarField(g)};
}

const char* const axis[3] = {"x", "y", "z"};

std::string level_dir(int n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "level_%05d", n);
  return buf;
}

void write_vector(const fs::path& dir, const std::string& name, const VectorField& v) {
  for (int c = 0; c < 3; ++c) write_snapshot((dir / (name + "_" + axis[c] + ".mhdf")).string(), v[c]);
}

VectorField read_vector(const fs::path& dir, const std::string& name, const Grid* time_grid) {
  VectorField out;
  std::array<ScalarField, 3> c;
  for (int i = 0; i < 3; ++i) {
    const fs::path p = dir / (name + "_" + axis[i] + ".mhdf");
    if (!fs::exists(p)) throw UsageError("missing file " + p.string());
    c[i] = read_snapshot(p.string(), time_grid);
  }
  return {c[0], c[1], c[2]};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path.string());
  f << text;
  if (!f) throw UsageError("cannot write " + path.string());
}

fs::path prepare_out(const RunConfig& c) {
  const fs::path out(c.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw UsageError("cannot create output directory " + out.string());
  return out;
}

json compat_json(const CompatReport& r, double tol) {
  json items = json::object();
  for (const auto& item : r.items) items[item.name] = {{"residual", item.residual}, {"tol", tol}, {"ok", item.ok}};
  return items;
}

json norms_json(const StateNorms& n) { return {{"v", n.v}, {"B", n.B}, {"h", n.h}}; }

// X - xi at every level, trapezoidal in time like the deformation history.
std::vector<VectorField> displacement_history(const VectorSeries& v, double dt) {
  std::vector<VectorField> d{VectorField(v.grid())};
  for (std::size_t n = 1; n < v.size(); ++n) d.push_back(d.back() + (0.5 * dt) * (v.u[n - 1] + v.u[n]));
  return d;
}

std::vector<int> snapshot_levels(int levels, int cadence) {
  std::vector<int> out;
  for (int n = 0; n < levels; n += cadence) out.push_back(n);
  if (out.back() != levels - 1) out.push_back(levels - 1);
  return out;
}

IterationConfig halved(IterationConfig c) {
  c.T /= 2;
  const double steps = c.T / c.dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * steps) c.dt /= 2;
  return c;
}

int run_continuation(const RunConfig& config, const InitialData& data, const fs::path& out, json summary) {
  const ContinuationReport r = continuation_experiment(data.u0, data.H0, data.h0, config.iteration, config.eps0);
  summary["status"] = r.first_converged ? "converged" : "non_contraction";
  summary["continuation"] = {{"eps0", r.eps0},
                             {"E0", r.E0},
                             {"E_T", r.E_T},
                             {"E_2T", r.E_2T},
                             {"C0", r.c0},
                             {"C1", r.c1},
                             {"C0_second", r.c0_2},
                             {"C1_second", r.c1_2},
                             {"bound", r.bound},
                             {"bound_second", r.bound_2},
                             {"first_converged", r.first_converged},
                             {"bound_holds", r.bound_holds},
                             {"small_enough", r.small_enough},
                             {"restart_attempted", r.restart_attempted},
                             {"restart_converged", r.restart_converged},
                             {"second_bound_holds", r.second_bound_holds},
                             {"chi_first", r.chi1},
                             {"chi_second", r.chi2},
                             {"failure", r.failure},
                             {"ok", r.ok()}};
  std::string csv = "level,t,E\n";
  for (std::size_t n = 0; n < r.E.size(); ++n) csv += std::to_string(n) + "," + num(r.t[n]) + "," + num(r.E[n]) + "\n";
  write_text(out / "levels.csv", csv);
  write_text(out / "summary.json", summary.dump(2) + "\n");
  if (!r.first_converged) {
    std::cerr << "non-contraction: " << r.failure << "\n";
    return exit_noncontraction;
  }
  if (!r.ok()) {
    std::cerr << "continuation failed: " << r.failure << "\n";
    return exit_diagnostic;
  }
  return exit_ok;
}

}  // namespace

std::string RunConfig::canonical() const {
  std::string s;
  for (const auto& k : keys()) s += k.info.name + " = " + k.get(*this) + "\n";
  return s;
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> out = [] {
    std::vector<ConfigKey> v;
    for (const auto& k : keys()) v.push_back(k.info);
    return v;
  }();
  return out;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig c;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string where = source + ":" + std::to_string(line) + ": ";
    const std::string body = trim(raw.substr(0, raw.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq)), value = trim(body.substr(eq + 1));
    const auto it = std::find_if(keys().begin(), keys().end(), [&](const Key& k) { return k.info.name == key; });
    if (it == keys().end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (seen.count(key)) throw ConfigError(where + "key '" + key + "' repeats line " + std::to_string(seen[key]));
    seen[key] = line;
    try {
      it->set(c, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + "key '" + key + "': " + e.what());
    } catch (const std::out_of_range&) {
      throw ConfigError(where + "key '" + key + "': value out of range");
    }
  }
  try {
    validate_run(c);
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    const std::string key = msg.substr(0, msg.find(':'));
    const auto line_of = seen.find(key);
    const std::string at = line_of != seen.end() ? ":" + std::to_string(line_of->second) : "";
    throw ConfigError(source + at + ": key '" + key + "': " + msg.substr(std::min(msg.size(), key.size() + 2)));
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot read config file " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return parse_config(s.str(), path);
}

InitialData make_initial_data(const RunConfig& config) {
  const Grid g = run_grid(config);
  InitialData d{VectorField(g), VectorField(g), SurfaceField(g)};
  if (!config.initial_data.empty()) {
    const fs::path dir(config.initial_data);
    if (!fs::is_directory(dir)) throw UsageError("initial data directory " + dir.string() + " does not exist");
    d.u0 = read_vector(dir, "v", &g);
    d.H0 = read_vector(dir, "B", &g);
    const fs::path hp = dir / "h.mhdf";
    if (!fs::exists(hp)) throw UsageError("missing file " + hp.string());
    d.h0 = read_surface_snapshot(hp.string(), g);
    if (!d.u0.grid().same_space(g)) throw UsageError("initial data grid does not match the config grid");
    return d;
  }
  const double A = config.amplitude;
  const std::string& s = config.scenario;
  if (s == "zero") return d;
  const double kx = 2 * pi / g.lx, ky = 2 * pi / g.ly;
  d.h0 = SurfaceField::sample(g, [&](double x, double y) {
    return config.surface_amplitude * std::cos(kx * x + ky * y);
  });
  d.u0 = shear_velocity(g, A);
  if (s == "ns-reduction") return d;
  d.H0 = wall_field(g, A, s == "polluted-divergence" ? config.pollution : 0.0);
  return d;
}

StateNorms state_norms(const VectorField& v, const VectorField& B, const SurfaceField& h, double l) {
  return {sobolev_norm(v, l + 1.0), sobolev_norm(B, l + 1.0), sobolev_norm(h, l + 1.5)};
}

PushForward push_forward(const ScalarField& f, const VectorField& displacement) {
  const Grid& g = f.grid();
  require_same_space(g, displacement.grid(), "push_forward");
  Eigen::ArrayXd mass = Eigen::ArrayXd::Zero(g.size()), weight = Eigen::ArrayXd::Zero(g.size());
  const double snap = 1e-10;
  auto split = [snap](double s, int& i0, double& w) {
    i0 = int(std::floor(s));
    w = s - i0;
    if (w < snap) w = 0.0;
    if (w > 1 - snap) {
      ++i0;
      w = 0.0;
    }
  };
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      for (int k = 0; k < g.nz; ++k) {
        const Eigen::Index p = g.index(i, j, k);
        const double sx = (g.x(i) + displacement[0].values()[p]) / g.hx();
        const double sy = (g.y(j) + displacement[1].values()[p]) / g.hy();
        const double sz = std::clamp((g.z(k) + displacement[2].values()[p] + g.depth) / g.hz(), 0.0, double(g.nz - 1));
        int ix, iy, iz;
        double wx, wy, wz;
        split(sx, ix, wx);
        split(sy, iy, wy);
        split(sz, iz, wz);
        const double cell = g.cell_weight(k);
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) {
              const double w = (a ? wx : 1 - wx) * (b ? wy : 1 - wy) * (c ? wz : 1 - wz);
              if (w == 0.0) continue;
              const int ti = ((ix + a) % g.nx + g.nx) % g.nx, tj = ((iy + b) % g.ny + g.ny) % g.ny;
              const int tk = std::min(iz + c, g.nz - 1);
              const Eigen::Index q = g.index(ti, tj, tk);
              mass[q] += cell * w * f.values()[p];
              weight[q] += cell * w;
            }
      }
  PushForward out{ScalarField(g), 0};
  for (Eigen::Index q = 0; q < g.size(); ++q) {
    if (weight[q] > 0.0)
      out.field.values()[q] = mass[q] / weight[q];
    else
      ++out.empty_nodes;
  }
  return out;
}

int cmd_check(const RunConfig& config) {
  const InitialData d = make_initial_data(config);
  const double tol = config.iteration.tol_compat;
  const CompatReport r = check_compatibility(d.u0, d.H0, reference_normal(d.u0.grid()), tol, config.iteration.nu);
  json j;
  j["config"] = config.canonical();
  j["compatibility"] = compat_json(r, tol);
  j["ok"] = r.ok();
  j["failing"] = r.failures();
  j["data_norms"] = norms_json(state_norms(d.u0, d.H0, d.h0, config.iteration.l));
  std::cout << j.dump(2) << "\n";
  if (!r.ok()) {
    for (const auto& item : r.items)
      if (!item.ok)
        std::cerr << "compatibility failed: " << item.name << " = " << num(item.residual) << " exceeds tol_compat "
                  << num(tol) << "\n";
    return exit_diagnostic;
  }
  return exit_ok;
}

int cmd_run(const RunConfig& config, int halvings) {
  if (halvings < 0 || halvings > 3) throw UsageError("--halve-T must be between 0 and 3");
  set_worker_count(config.workers);
  const fs::path out = prepare_out(config);
  const InitialData data = make_initial_data(config);
  write_text(out / "config.cfg", config.canonical());

  json summary;
  summary["config"] = config.canonical();
  summary["scenario"] = config.initial_data.empty() ? config.scenario : "initial_data";
  if (config.scenario == "continuation" && config.initial_data.empty())
    return run_continuation(config, data, out, summary);

  IterationConfig it = config.iteration;
  int used = 0;
  FullRun run;
  json failures = json::array();
  for (;;) {
    try {
      run = run_full_solver(data.u0, data.H0, data.h0, it);
      break;
    } catch (const std::exception& e) {
      // A flow map that degenerates within T is the same failure as a
      // missing contraction: the horizon is too long for the data.
      const auto* nc = dynamic_cast<const NonContractionError*>(&e);
      if (!nc && !dynamic_cast<const DegenerateMapError*>(&e)) throw;
      std::cerr << "non-contraction at T = " << num(it.T) << ": " << e.what() << "\n";
      json attempt = {{"T", it.T}, {"dt", it.dt}};
      attempt["chi"] = nc ? json(nc->chi()) : json(nullptr);
      attempt["iterate"] = nc ? json(nc->iterate()) : json(nullptr);
      attempt["message"] = e.what();
      failures.push_back(attempt);
      if (used >= halvings) {
        summary["status"] = "non_contraction";
        summary["attempts"] = failures;
        summary["suggestion"] = "retry with T = " + num(it.T / 2);
        std::cerr << "retry with T = " << num(it.T / 2) << " (--halve-T)\n";
        write_text(out / "summary.json", summary.dump(2) + "\n");
        return exit_noncontraction;
      }
      it = halved(it);
      ++used;
    }
  }

  const MHDState& s = run.result.state;
  const IterationTrace& tr = run.result.trace;
  const SystemResiduals res = system_residuals(s, it);
  const PropagationReport prop = divergence_propagation(s.B, s.v, it.lambda, it.contraction_tol, it.jac_floor);
  const EnergyReport energy = energy_monitor(s, it);
  const CompatReport compat = check_compatibility(data.u0, data.H0, reference_normal(data.u0.grid()), it.tol_compat, it.nu);
  const StateNorms final_norms = state_norms(s.v.u.back(), s.B.u.back(), s.h.u.back(), it.l);

  summary["status"] = "converged";
  summary["T"] = it.T;
  summary["dt"] = it.dt;
  summary["halvings"] = used;
  summary["attempts"] = failures;
  summary["smallness"] = {{"value", run.result.smallness.value},
                          {"delta", it.delta},
                          {"threshold", smallness_threshold()},
                          {"ok", run.result.smallness.ok}};
  json table = json::array();
  for (std::size_t m = 0; m < tr.Y.size(); ++m) {
    json row = {{"m", m + 1}, {"Z", tr.Z[m]}, {"Y", tr.Y[m]}};
    row["ratio"] = m == 0 ? json(nullptr) : json(tr.ratios[m - 1]);
    row["B_sup"] = tr.B_sup[m];
    table.push_back(row);
  }
  summary["iterates"] = table;
  summary["chi"] = tr.chi();
  summary["norms"] = json::parse(run.report.to_json());
  summary["C0"] = run.c0;
  summary["residuals"] = {{"momentum", res.momentum},
                          {"induction", res.induction},
                          {"continuity", res.continuity},
                          {"normal_stress", res.normal_stress},
                          {"tangential_stress", res.tangential_stress},
                          {"magnetic_boundary", res.magnetic_boundary},
                          {"limit", 10 * it.contraction_tol}};
  summary["divergence"] = {{"initial", prop.initial},
                           {"max", prop.max_value},
                           {"tol_div", prop.tol_div},
                           {"max_mismatch", prop.max_mismatch},
                           {"bounded", prop.bounded},
                           {"nonincreasing", prop.nonincreasing},
                           {"worst", {{"level", prop.worst_level},
                                      {"t", prop.worst_time},
                                      {"i", prop.worst_i},
                                      {"j", prop.worst_j},
                                      {"k", prop.worst_k}}}};
  summary["energy"] = {{"asserted", energy.asserted},
                       {"nonincreasing", energy.nonincreasing},
                       {"first_increase", energy.first_increase}};
  summary["compatibility"] = compat_json(compat, it.tol_compat);
  summary["final_state_norms"] = norms_json(final_norms);
  summary["warnings"] = run.result.warnings;

  const int levels = int(s.v.size());
  const std::vector<VectorField> disp = displacement_history(s.v, it.dt);
  const std::vector<int> snaps = snapshot_levels(levels, config.cadence);
  summary["snapshots"] = snaps;
  for (int n : snaps) {
    const fs::path dir = out / "snapshots" / level_dir(n);
    fs::create_directories(dir);
    write_vector(dir, "v", s.v.u[n]);
    write_vector(dir, "B", s.B.u[n]);
    write_vector(dir, "X", disp[n]);
    write_snapshot((dir / "q.mhdf").string(), s.q.u[n]);
    write_snapshot((dir / "h.mhdf").string(), s.h.u[n]);
  }

  std::string csv = "level,t,v_l2,B_l2,h_max,div_inf,div_l2,flat_div_inf,energy,jac_min,jac_max\n";
  for (int n = 0; n < levels; ++n) {
    const ScalarField& jac = s.deformation[n].jac;
    csv += std::to_string(n) + "," + num(s.v.t[n]) + "," + num(l2_norm(s.v.u[n])) + "," + num(l2_norm(s.B.u[n])) +
           "," + num(s.h.u[n].values().abs().maxCoeff()) + "," + num(prop.div_inf[n]) + "," + num(prop.div_l2[n]) +
           "," + num(prop.flat_div_inf[n]) + "," + num(energy.energy[n]) + "," + num(jac.values().minCoeff()) + "," +
           num(jac.values().maxCoeff()) + "\n";
  }
  write_text(out / "levels.csv", csv);

  bool ok = true;
  json failed = json::array();
  if (!prop.ok()) failed.push_back("divergence"), ok = false;
  if (energy.asserted && !energy.nonincreasing) failed.push_back("energy"), ok = false;
  if (res.max() > 10 * it.contraction_tol) failed.push_back("residuals"), ok = false;
  summary["failed_diagnostics"] = failed;
  write_text(out / "summary.json", summary.dump(2) + "\n");
  if (!ok) {
    std::cerr << "diagnostics failed: " << failed.dump() << "\n";
    return exit_diagnostic;
  }
  return exit_ok;
}

int cmd_probe(const RunConfig& config) {
  set_worker_count(config.workers);
  const fs::path out = prepare_out(config);
  ProbeConfig pc;
  pc.grid.nx = pc.grid.ny = config.probe_n;
  pc.grid.nz = config.probe_n + 1;
  pc.grid.lx = config.grid.lx;
  pc.grid.ly = config.grid.ly;
  pc.grid.depth = config.grid.depth;
  pc.l = config.iteration.l;
  pc.T0 = config.probe_T0;
  pc.levels = config.probe_levels;
  pc.trials = config.probe_trials;
  pc.seed = config.seed;
  const ProbeReport r = inequality_probes(pc);
  write_text(out / "probe.json", r.to_json());
  std::string csv = "probe,trial,T,ratio\n";
  for (const auto& s : r.slopes)
    for (std::size_t t = 0; t < s.ratios.size(); ++t)
      for (std::size_t w = 0; w < s.T.size(); ++w)
        csv += s.name + "," + std::to_string(t) + "," + num(s.T[w]) + "," + num(s.ratios[t][w]) + "\n";
  write_text(out / "probe.csv", csv);
  for (const auto& c : r.constants)
    std::cout << c.name << ": spread " << num(c.spread) << (c.ok ? " ok" : " FAIL") << "\n";
  for (const auto& s : r.slopes)
    std::cout << s.name << ": slope " << num(s.slope) << " expected " << num(s.expected) << (s.ok ? " ok" : " FAIL")
              << "\n";
  return exit_ok;
}

int cmd_pushfwd(const RunConfig& config) {
  const fs::path snaps = fs::path(config.out) / "snapshots";
  if (!fs::is_directory(snaps)) throw UsageError("no snapshots under " + snaps.string() + "; run first");
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(snaps))
    if (e.is_directory()) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  const Grid g = run_grid(config);
  for (const auto& dir : dirs) {
    const VectorField X = read_vector(dir, "X", &g);
    const fs::path target = fs::path(config.out) / "eulerian" / dir.filename();
    fs::create_directories(target);
    int empty = 0;
    for (const std::string name : {"v", "B"}) {
      const VectorField f = read_vector(dir, name, &g);
      for (int c = 0; c < 3; ++c) {
        const PushForward p = push_forward(f[c], X);
        empty = std::max(empty, p.empty_nodes);
        write_snapshot((target / (name + "_" + axis[c] + ".mhdf")).string(), p.field);
      }
    }
    const fs::path qp = dir / "q.mhdf";
    if (!fs::exists(qp)) throw UsageError("missing file " + qp.string());
    const PushForward q = push_forward(read_snapshot(qp.string(), &g), X);
    write_snapshot((target / "q.mhdf").string(), q.field);
    std::cout << dir.filename().string() << ": " << std::max(empty, q.empty_nodes) << " empty nodes\n";
  }
  return exit_ok;
}

}  // namespace mhdlag
