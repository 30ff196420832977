#include "mhdlag/diagnostics.hpp"

#include "mhdlag/parallel.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace mhdlag {

bool CompatReport::ok() const {
  return std::all_of(items.begin(), items.end(), [](const CompatItem& c) { return c.ok; });
}

double CompatReport::residual(const std::string& name) const {
  for (const auto& c : items)
    if (c.name == name) return c.residual;
  throw std::out_of_range("no compatibility item " + name);
}

std::string CompatReport::failures() const {
  std::string out;
  for (const auto& c : items)
    if (!c.ok) out += (out.empty() ? "" : ", ") + c.name;
  return out;
}

CompatReport check_compatibility(const VectorField& u0, const VectorField& H0, const SurfaceVectorField& n0,
                                 double tol, double nu) {
  const Grid& g = u0.grid();
  require_same_space(g, H0.grid(), "check_compatibility");
  CompatReport r;
  auto add = [&](const std::string& name, double value) { r.items.push_back({name, value, value <= tol}); };
  add("div_u0", max_abs(divergence(u0)));
  add("div_H0", max_abs(divergence(H0)));
  const SurfaceVectorField ht = trace_top(H0);
  add("H0_top_trace", std::max({max_abs(ht[0]), max_abs(ht[1]), max_abs(ht[2])}));

  const TensorField du = velocity_gradient(u0);
  double stress = 0.0;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const Eigen::Index p = g.index(i, j, g.nz - 1), c = g.column(i, j);
      const Eigen::Matrix3d grad = du.at(p);
      const Eigen::Vector3d n(n0[0].values()[c], n0[1].values()[c], n0[2].values()[c]);
      const Eigen::Vector3d dn = 0.5 * (grad + grad.transpose()) * n;
      stress = std::max(stress, (2.0 * nu * (dn - dn.dot(n) * n)).cwiseAbs().maxCoeff());
    }
  add("tangential_stress", stress);
  return r;
}

namespace {

struct Located {
  double value = 0.0;
  Eigen::Index index = 0;
};

Located max_located(const ScalarField& f) {
  Located m;
  const auto& a = f.values();
  for (Eigen::Index p = 0; p < a.size(); ++p)
    if (std::abs(a[p]) > m.value) m = {std::abs(a[p]), p};
  return m;
}

// Linear-in-z interpolation of the face values of f.
ScalarField face_lift(const ScalarField& f) {
  const Grid& g = f.grid();
  ScalarField out(g);
  for (Eigen::Index c = 0; c < g.plane_size(); ++c) {
    const double bot = f.values()[c * g.nz], top = f.values()[c * g.nz + g.nz - 1];
    for (int k = 0; k < g.nz; ++k) {
      const double s = double(k) / (g.nz - 1);
      out.values()[c * g.nz + k] = (1.0 - s) * bot + s * top;
    }
  }
  return out;
}

double interior_max(const ScalarField& f) {
  const Grid& g = f.grid();
  double m = 0.0;
  for (Eigen::Index c = 0; c < g.plane_size(); ++c)
    for (int k = 1; k < g.nz - 1; ++k) m = std::max(m, std::abs(f.values()[c * g.nz + k]));
  return m;
}

}  // namespace

PropagationReport divergence_propagation(const VectorSeries& B, const VectorSeries& v, double lambda,
                                         double solver_tol, double jac_floor) {
  if (B.size() != v.size() || B.size() < 2) throw FieldError("divergence_propagation: series lengths differ");
  const Grid& g = B.grid();
  const double dt = B.t[1] - B.t[0];
  const std::vector<DeformationState> def = deformation_history(v.u, dt, jac_floor);

  PropagationReport r;
  double bmax = 0.0;
  for (const auto& b : B.u) bmax = std::max(bmax, max_abs(b));
  r.tol_div = 1e-6 * bmax + 10.0 * solver_tol;

  std::vector<ScalarField> direct;
  for (std::size_t n = 0; n < B.size(); ++n) direct.push_back(transformed_divergence(def[n].g_mat, B.u[n]));

  // Independent integration of h_t = lambda lap_v h, written for w = h - L
  // where L carries the face values of the direct series.
  const HeatStepper heat(g, lambda, dt);
  ScalarField lift = face_lift(direct[0]);
  ScalarField w = direct[0] - lift;
  std::vector<ScalarField> integrated{direct[0]};
  for (std::size_t n = 1; n < B.size(); ++n) {
    const TensorField& G = def[n].g_mat;
    const ScalarField lift_n = face_lift(direct[n]);
    ScalarField src = lambda * (transformed_laplacian(G, w) - laplacian(w));
    src += lambda * transformed_laplacian(G, lift_n);
    src -= (1.0 / dt) * (lift_n - lift);
    w = heat.step(w, src);
    lift = lift_n;
    integrated.push_back(w + lift);
  }

  for (std::size_t n = 0; n < B.size(); ++n) {
    const Located m = max_located(direct[n]);
    r.t.push_back(B.t[n]);
    r.div_inf.push_back(m.value);
    r.div_l2.push_back(l2_norm(direct[n]));
    r.flat_div_inf.push_back(max_abs(divergence(B.u[n])));
    r.integrated_inf.push_back(max_abs(integrated[n]));
    r.mismatch.push_back(interior_max(integrated[n] - direct[n]));
    r.max_mismatch = std::max(r.max_mismatch, r.mismatch.back());
    if (n == 0 || m.value > r.max_value) {
      r.max_value = m.value;
      r.worst_level = int(n);
      r.worst_time = B.t[n];
      r.worst_i = int(m.index / (Eigen::Index(g.ny) * g.nz));
      r.worst_j = int((m.index / g.nz) % g.ny);
      r.worst_k = int(m.index % g.nz);
    }
    if (n > 0 && r.div_inf[n] > r.div_inf[n - 1] + r.tol_div) r.nonincreasing = false;
  }
  r.initial = r.div_inf.front();
  r.bounded = r.max_value <= r.initial + r.tol_div;
  return r;
}

EnergyReport energy_monitor(const MHDState& state, const IterationConfig& config, bool force_free) {
  EnergyReport r;
  for (std::size_t n = 0; n < state.v.size(); ++n) {
    const double ev = l2_norm(state.v.u[n]), eb = l2_norm(state.B.u[n]);
    r.t.push_back(state.v.t[n]);
    r.energy.push_back(0.5 * (ev * ev + eb * eb));
  }
  r.asserted = force_free && config.g_grav == 0.0;
  for (std::size_t n = 1; n < r.energy.size(); ++n)
    if (r.energy[n] > r.energy[n - 1] * (1.0 + 1e-12)) {
      r.nonincreasing = false;
      r.first_increase = int(n);
      break;
    }
  return r;
}

double continuation_energy(const VectorField& v, const VectorField& B, const SurfaceField& h, double l) {
  return sobolev_norm(v, l + 1.0) + sobolev_norm(B, l + 1.0) + sobolev_norm(h, l + 1.5);
}

namespace {

// Surface constant: growth of ||h|| per unit time and unit solution norm.
double surface_constant(const MHDState& s, double lhs, double l) {
  if (lhs <= 0.0) return 0.0;
  const double h0 = sobolev_norm(s.h.u.front(), l + 1.5);
  double c = 0.0;
  for (std::size_t n = 1; n < s.h.size(); ++n) {
    const double t = s.h.t[n] - s.h.t.front();
    c = std::max(c, std::max(0.0, sobolev_norm(s.h.u[n], l + 1.5) - h0) / (t * lhs));
  }
  return c;
}

}  // namespace

ContinuationReport continuation_experiment(const VectorField& u0, const VectorField& H0, const SurfaceField& h0,
                                           const IterationConfig& config, double eps0) {
  ContinuationReport r;
  r.eps0 = eps0;
  const double l = config.l, T = config.T;
  FullRun first;
  try {
    first = run_full_solver(u0, H0, h0, config);
  } catch (const std::exception& e) {
    r.failure = std::string("first segment: ") + e.what();
    return r;
  }
  const MHDState& s1 = first.result.state;
  r.first_converged = first.result.trace.converged;
  r.chi1 = first.result.trace.chi();
  for (std::size_t n = 0; n < s1.v.size(); ++n) {
    r.t.push_back(s1.v.t[n]);
    r.E.push_back(continuation_energy(s1.v.u[n], s1.B.u[n], s1.h.u[n], l));
  }
  r.E0 = r.E.front();
  r.E_T = r.E.back();
  r.c0 = first.c0;
  r.c1 = surface_constant(s1, first.lhs, l);
  r.bound = (1.0 + r.c0 + r.c0 * r.c1 * T) * r.E0;
  r.bound_holds = r.E_T <= r.bound * (1.0 + 1e-12);
  r.small_enough = r.bound <= eps0;
  if (!r.small_enough) {
    r.failure = "measured bound exceeds eps0; not restarted";
    return r;
  }

  r.restart_attempted = true;
  FullRun second;
  try {
    second = run_full_solver(s1.v.u.back(), s1.B.u.back(), s1.h.u.back(), config, &s1.deformation.back());
  } catch (const std::exception& e) {
    r.failure = std::string("restart: ") + e.what();
    return r;
  }
  const MHDState& s2 = second.result.state;
  r.restart_converged = second.result.trace.converged;
  r.chi2 = second.result.trace.chi();
  for (std::size_t n = 1; n < s2.v.size(); ++n) {
    r.t.push_back(T + s2.v.t[n]);
    r.E.push_back(continuation_energy(s2.v.u[n], s2.B.u[n], s2.h.u[n], l));
  }
  r.E_2T = r.E.back();
  r.c0_2 = second.c0;
  r.c1_2 = surface_constant(s2, second.lhs, l);
  const double c0 = std::max(r.c0, r.c0_2), c1 = std::max(r.c1, r.c1_2);
  r.bound_2 = (1.0 + c0 + c0 * c1 * T) * r.E_T;
  r.second_bound_holds = r.E_2T <= r.bound_2 * (1.0 + 1e-12);
  return r;
}

// Probes.

namespace {

std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double uniform(std::uint64_t& state) { return double(splitmix(state) >> 11) * 0x1.0p-53; }

Grid refined(const Grid& g) {
  Grid f = g;
  f.nx = 2 * g.nx;
  f.ny = 2 * g.ny;
  f.nz = 2 * (g.nz - 1) + 1;
  return f;
}

VectorField random_vector(const Grid& g, const Grid& spectrum, std::uint64_t seed) {
  return {random_band_limited(g, spectrum, seed), random_band_limited(g, spectrum, seed + 101),
          random_band_limited(g, spectrum, seed + 202)};
}

template <typename Field>
Series<Field> constant_in_time(const Field& f, double T, int levels) {
  Series<Field> s;
  for (int n = 0; n < levels; ++n) s.push_back(T * n / (levels - 1), f);
  return s;
}

struct Windows {
  std::vector<double> T;
};

Windows windows(double T0) {
  Windows w;
  for (int i = 4; i >= 0; --i) w.T.push_back(T0 / double(1 << i));
  return w;
}

// Kinematic probes for one trial: Lemma 2.1 (cotangent matrix), Lemma 2.2
// (normal) and the product estimate of the constant-coefficient scheme.
std::array<std::vector<double>, 3> kinematic_ratios(const ProbeConfig& pc, std::uint64_t seed) {
  const Grid& g = pc.grid;
  VectorField u = random_vector(g, g, seed);
  double gmax = 0.0;
  const TensorField du = velocity_gradient(u);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) gmax = std::max(gmax, max_abs(du(r, c)));
  u *= 0.05 / (pc.T0 * gmax);
  const VectorField F = random_vector(g, g, seed + 7), Gf = random_vector(g, g, seed + 13);
  const VectorField FG = advective_derivative(F, Gf);
  const SurfaceVectorField n0 = reference_normal(g);

  std::array<std::vector<double>, 3> out;
  for (double T : windows(pc.T0).T) {
    const VectorSeries us = constant_in_time(u, T, pc.levels);
    const double dt = T / (pc.levels - 1);
    const auto def = deformation_history(us.u, dt, 0.01);
    TensorSeries gm;
    std::array<SurfaceSeries, 3> dn;
    for (std::size_t n = 0; n < def.size(); ++n) {
      gm.push_back(us.t[n], def[n].g_mat - TensorField::identity(g));
      const SurfaceVectorField nn = transformed_normal(def[n].g_mat, n0);
      for (int c = 0; c < 3; ++c) dn[c].push_back(us.t[n], nn[c] - n0[c]);
    }
    const double rhs = solution_norm(us, pc.l);
    out[0].push_back(anisotropic_norm(gm, pc.l + 1.0) / rhs);
    double normal = 0.0;
    for (int c = 0; c < 3; ++c) normal += boundary_norm(dn[c], pc.l);
    out[1].push_back(normal / rhs);
    const double lhs = triple_norm(constant_in_time(FG, T, pc.levels), pc.l);
    out[2].push_back(lhs / (solution_norm(constant_in_time(F, T, pc.levels), pc.l) *
                            solution_norm(constant_in_time(Gf, T, pc.levels), pc.l)));
  }
  return out;
}

// Lemma 2.3 ratios for one trial on one grid.
std::array<double, 3> product_ratios(const Grid& g, const Grid& spectrum, double l, std::uint64_t seed) {
  const ScalarField u = random_band_limited(g, spectrum, seed);
  const ScalarField v = random_band_limited(g, spectrum, seed + 1);
  const ScalarField uv = u * v;
  const double s = l + 1.0;       // > 3/2
  const double hi = l + 1.0, hs = l + 1.5;  // both > 3/2
  return {sobolev_norm(uv, l) / (sobolev_norm(u, l) * sobolev_norm(v, s)),
          sobolev_norm(uv, 0.0) / (sobolev_norm(u, l) * sobolev_norm(v, 1.5 - l)),
          sobolev_norm(uv, hi) /
              (sobolev_norm(u, hi) * sobolev_norm(v, hs) + sobolev_norm(v, hi) * sobolev_norm(u, hs))};
}

}  // namespace

ScalarField random_band_limited(const Grid& grid, const Grid& spectrum, std::uint64_t seed) {
  using std::numbers::pi;
  const int K = std::max(1, spectrum.nx / 6), Ky = std::max(1, spectrum.ny / 6);
  const int M = std::max(1, (spectrum.nz - 1) / 6);
  struct Mode {
    int kx, ky, m;
    double amp, phase, zphase;
  };
  std::vector<Mode> modes;
  std::uint64_t state = seed;
  for (int kx = -K; kx <= K; ++kx)
    for (int ky = -Ky; ky <= Ky; ++ky)
      for (int m = 0; m <= M; ++m)
        modes.push_back({kx, ky, m, 2.0 * uniform(state) - 1.0, 2.0 * pi * uniform(state), 2.0 * pi * uniform(state)});
  ScalarField f = ScalarField::sample(grid, [&](double x, double y, double z) {
    double s = 0.0;
    for (const auto& md : modes)
      s += md.amp * std::cos(2.0 * pi * (md.kx * x / grid.lx + md.ky * y / grid.ly) + md.phase) *
           std::cos(md.m * pi * (z + grid.depth) / grid.depth + md.zphase);
    return s;
  });
  const double n = l2_norm(f);
  if (n > 0.0) f *= 1.0 / n;
  return f;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return 0.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= double(n);
  my /= double(n);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

ProbeReport inequality_probes(const ProbeConfig& pc) {
  ProbeReport rep;
  rep.seed = pc.seed;
  rep.trials = std::max(0, pc.trials);
  rep.l = pc.l;
  const int trials = rep.trials;
  const Grid fine = refined(pc.grid);

  std::vector<std::array<double, 3>> coarse(trials), finer(trials);
  std::vector<std::array<std::vector<double>, 3>> kin(trials);
  auto trial_seed = [&](int t) {
    std::uint64_t s = pc.seed + std::uint64_t(t);
    return splitmix(s);
  };
  parallel_for(std::size_t(trials), [&](std::size_t t) {
    const std::uint64_t s = trial_seed(int(t));
    coarse[t] = product_ratios(pc.grid, pc.grid, pc.l, s);
    finer[t] = product_ratios(fine, pc.grid, pc.l, s);
    kin[t] = kinematic_ratios(pc, s + 1000);
  });

  const char* product_names[3] = {"product_Wl_Ws", "product_L2_Wl_W3/2-l", "product_Wl_symmetric"};
  for (int i = 0; i < 3; ++i) {
    ConstantProbe p;
    p.name = product_names[i];
    for (int t = 0; t < trials; ++t) {
      p.coarse.push_back(coarse[t][i]);
      p.fine.push_back(finer[t][i]);
    }
    if (trials > 0) {
      p.constant_coarse = *std::max_element(p.coarse.begin(), p.coarse.end());
      p.constant_fine = *std::max_element(p.fine.begin(), p.fine.end());
      const double lo = std::min(p.constant_coarse, p.constant_fine), hi = std::max(p.constant_coarse, p.constant_fine);
      p.spread = lo > 0.0 ? hi / lo : 0.0;
      p.ok = std::isfinite(p.spread) && lo > 0.0 && p.spread < 2.0;
    }
    rep.constants.push_back(std::move(p));
  }

  const char* slope_names[3] = {"cotangent_matrix_time_scaling", "normal_time_scaling", "product_estimate_time_scaling"};
  const double expected[3] = {1.0 - pc.l / 2.0, 1.0 - pc.l / 2.0, std::min((1.0 - pc.l) / 2.0, 0.5)};
  const std::vector<double> T = windows(pc.T0).T;
  for (int i = 0; i < 3; ++i) {
    SlopeProbe p;
    p.name = slope_names[i];
    p.T = T;
    p.expected = expected[i];
    p.two_sided = i != 1;
    for (int t = 0; t < trials; ++t) {
      p.ratios.push_back(kin[t][i]);
      p.slopes.push_back(loglog_slope(T, kin[t][i]));
    }
    if (trials > 0) {
      p.slope = std::accumulate(p.slopes.begin(), p.slopes.end(), 0.0) / trials;
      p.ok = std::isfinite(p.slope) &&
             (p.two_sided ? std::abs(p.slope - p.expected) <= 0.1 : p.slope >= p.expected - 0.1);
    }
    rep.slopes.push_back(std::move(p));
  }
  return rep;
}

bool ProbeReport::ok() const {
  for (const auto& c : constants)
    if (!c.ok) return false;
  for (const auto& s : slopes)
    if (!s.ok) return false;
  return true;
}

std::string ProbeReport::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["trials"] = trials;
  j["l"] = l;
  j["constants"] = nlohmann::ordered_json::array();
  for (const auto& c : constants)
    j["constants"].push_back({{"name", c.name},
                              {"coarse", c.coarse},
                              {"fine", c.fine},
                              {"constant_coarse", c.constant_coarse},
                              {"constant_fine", c.constant_fine},
                              {"spread", c.spread},
                              {"ok", c.ok}});
  j["slopes"] = nlohmann::ordered_json::array();
  for (const auto& s : slopes)
    j["slopes"].push_back({{"name", s.name},
                           {"T", s.T},
                           {"ratios", s.ratios},
                           {"slopes", s.slopes},
                           {"slope", s.slope},
                           {"expected", s.expected},
                           {"two_sided", s.two_sided},
                           {"ok", s.ok}});
  return j.dump(2) + "\n";
}

}  // namespace mhdlag
