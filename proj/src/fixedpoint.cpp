#include "mhdlag/fixedpoint.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace mhdlag {

double smallness_threshold() { return (std::sqrt(15.0) - 3.0) / 6.0; }

int IterationConfig::levels() const { return int(std::llround(T / dt)) + 1; }

void IterationConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) { throw ConfigError(key + ": " + why); };
  if (!(l > 0.5 && l < 1.0)) fail("l", "must lie in (1/2, 1)");
  if (!(nu > 0.0) || !std::isfinite(nu)) fail("nu", "must be positive");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) fail("lambda", "must be positive");
  if (!(g_grav >= 0.0) || !std::isfinite(g_grav)) fail("g_grav", "must be nonnegative");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) fail("gamma", "must be nonnegative");
  if (!(T > 0.0) || !std::isfinite(T)) fail("T", "must be positive");
  if (!(dt > 0.0) || dt > T) fail("dt", "must lie in (0, T]");
  if (std::abs((levels() - 1) * dt - T) > 1e-9 * T) fail("dt", "T must be an integer multiple of dt");
  if (max_iters < 1) fail("max_iters", "must be at least 1");
  if (!(contraction_tol > 0.0 && contraction_tol < 1.0)) fail("contraction_tol", "must lie in (0, 1)");
  if (!(delta > 0.0 && delta < smallness_threshold())) fail("delta", "must lie in (0, delta0) with delta0 = 0.1455");
  if (!(jac_floor > 0.0 && jac_floor < 1.0)) fail("jac_floor", "must lie in (0, 1)");
  if (!(tol_compat > 0.0)) fail("tol_compat", "must be positive");
  if (norm_stride < 1) fail("norm_stride", "must be at least 1");
}

namespace {

Grid time_grid(const Grid& space, const IterationConfig& config) {
  Grid g = space;
  g.dt = config.dt;
  g.nt = config.levels();
  return g;
}

template <typename Field>
Series<Field> constant_series(const Grid& g, const Field& value) {
  Series<Field> s;
  for (int n = 0; n < g.nt; ++n) s.push_back(g.t(n), value);
  return s;
}

template <typename Field>
Series<Field> difference(const Series<Field>& a, const Series<Field>& b) {
  Series<Field> out;
  for (std::size_t n = 0; n < a.size(); ++n) out.push_back(a.t[n], a.u[n] - b.u[n]);
  return out;
}

SurfaceVectorField zero_surface_vector(const Grid& g) { return {SurfaceField(g), SurfaceField(g), SurfaceField(g)}; }

// (a . grad_m) b with the transformed gradient tb(i, j) = (G grad)_j b_i.
VectorField contract(const VectorField& a, const TensorField& tb) {
  VectorField out(a.grid());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i] += a[j] * tb(i, j);
  return out;
}

VectorField wide_laplacian(const VectorField& v) { return {laplacian(v[0]), laplacian(v[1]), laplacian(v[2])}; }

struct Engines {
  StokesStepper stokes;
  HeatStepper heat;
  Engines(const Grid& g, const IterationConfig& c)
      : stokes(g, c.nu, c.dt, c.bottom), heat(g, c.lambda, c.dt) {}
};

// One linear solve of the Stokes and heat systems for the given data.
MHDState solve_linear(const Engines& eng, const Grid& g, const VectorField& u0, const VectorField& H0,
                      const VectorSeries& f, const ScalarSeries& rho, const SurfaceSeries& b,
                      const std::vector<SurfaceVectorField>& d, const VectorSeries& gsrc) {
  MHDState s;
  const int levels = g.nt;
  s.v.push_back(g.t(0), u0);
  s.B.push_back(g.t(0), H0);
  std::vector<ScalarField> q(levels);
  for (int n = 1; n < levels; ++n) {
    auto res = eng.stokes.step(s.v.u.back(), f.u[n], rho.u[n], b.u[n], d[n], n);
    s.v.push_back(g.t(n), std::move(res.v));
    q[n] = std::move(res.q);
    s.B.push_back(g.t(n), eng.heat.step(s.B.u.back(), gsrc.u[n]));
  }
  q[0] = q[1];
  for (int n = 0; n < levels; ++n) {
    s.q_surface.push_back(g.t(n), trace_top(q[n]));
    s.q.push_back(g.t(n), std::move(q[n]));
  }
  return s;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

// Shared stop logic. `next` maps iterate m to iterate m+1.
IterationTrace iterate_until_contracted(MHDState& state, const IterationConfig& config,
                                        const std::function<MHDState(const MHDState&)>& next) {
  IterationTrace trace;
  int increases = 0;
  for (int m = 1; m <= config.max_iters; ++m) {
    const auto start = std::chrono::steady_clock::now();
    MHDState s = next(state);
    s.iterate = m;
    const double Z = iterate_norm(s.v, s.B, s.q, s.q_surface, config);
    const double Y = iterate_norm(difference(s.v, state.v), difference(s.B, state.B), difference(s.q, state.q),
                                  difference(s.q_surface, state.q_surface), config);
    trace.Z.push_back(Z);
    trace.Y.push_back(Y);
    double bsup = 0.0;
    for (const auto& b : s.B.u) bsup = std::max(bsup, max_abs(b));
    trace.B_sup.push_back(bsup);
    trace.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    state = std::move(s);
    if (!std::isfinite(Z) || !std::isfinite(Y))
      throw NonContractionError("iterate " + std::to_string(m) + " is not finite; retry with T = " + fmt(config.T / 2),
                                trace.chi(), m);

    const double Y1 = trace.Y.front();
    if (trace.Y.size() >= 2) {
      const double prev = trace.Y[trace.Y.size() - 2];
      trace.ratios.push_back(prev > 0.0 ? Y / prev : 0.0);
      increases = Y > prev ? increases + 1 : 0;
    }
    if (Y1 == 0.0 || Y == 0.0 || (trace.Y.size() >= 2 && trace.ratios.back() < 1.0 && Y < config.contraction_tol * Y1)) {
      trace.converged = true;
      return trace;
    }
    if (increases >= 3)
      throw NonContractionError("successive differences grew three times in a row (chi = " + fmt(trace.chi()) +
                                    "); retry with T = " + fmt(config.T / 2),
                                trace.chi(), m);
  }
  throw NonContractionError("no contraction to " + fmt(config.contraction_tol) + " within " +
                                std::to_string(config.max_iters) + " iterates (chi = " + fmt(trace.chi()) +
                                "); retry with T = " + fmt(config.T / 2),
                            trace.chi(), config.max_iters);
}

}  // namespace

MHDState MHDState::zero(const Grid& grid, const IterationConfig& config) {
  const Grid g = time_grid(grid, config);
  MHDState s;
  s.v = constant_series(g, VectorField(g));
  s.B = s.v;
  s.q = constant_series(g, ScalarField(g));
  s.q_surface = constant_series(g, SurfaceField(g));
  s.h = s.q_surface;
  s.deformation.assign(std::size_t(g.nt), DeformationState::initial(g));
  for (int n = 0; n < g.nt; ++n) s.deformation[n].t = g.t(n);
  return s;
}

double IterationTrace::chi() const {
  // ratios[0] = Y_2 / Y_1; m >= 2 starts at ratios[1].
  double c = 0.0;
  for (std::size_t i = 1; i < ratios.size(); ++i) c = std::max(c, ratios[i]);
  return c;
}

SmallnessResult check_smallness(const VectorSeries& v, const IterationConfig& config) {
  SmallnessResult r;
  r.value = std::sqrt(v.duration()) * triple_norm_l2(subsample(v, config.norm_stride), config.l);
  r.margin = config.delta - r.value;
  r.ok = r.value <= config.delta;
  return r;
}

double iterate_norm(const VectorSeries& v, const VectorSeries& B, const ScalarSeries& q, const SurfaceSeries& q_surface,
                    const IterationConfig& config) {
  const int s = config.norm_stride;
  const double l = config.l;
  const ScalarSeries qs = subsample(q, s);
  VectorSeries grad_q;
  for (std::size_t n = 0; n < qs.size(); ++n) grad_q.push_back(qs.t[n], gradient(qs.u[n]));
  return solution_norm(subsample(v, s), l) + solution_norm(subsample(B, s), l) + triple_norm(qs, l) +
         triple_norm(grad_q, l) + boundary_norm(subsample(q_surface, s), l);
}

ConstantCoefficientData ConstantCoefficientData::zero(const Grid& grid, const IterationConfig& config) {
  const Grid g = time_grid(grid, config);
  ConstantCoefficientData d;
  d.f = constant_series(g, VectorField(g));
  d.g = d.f;
  d.rho = constant_series(g, ScalarField(g));
  d.b = constant_series(g, SurfaceField(g));
  d.d.assign(std::size_t(g.nt), zero_surface_vector(g));
  d.u0 = VectorField(g);
  d.H0 = VectorField(g);
  return d;
}

IterationResult picard_constant_coefficient(const ConstantCoefficientData& data, const IterationConfig& config) {
  config.validate();
  const Grid g = time_grid(data.u0.grid(), config);
  if (int(data.f.size()) != g.nt || int(data.g.size()) != g.nt || int(data.rho.size()) != g.nt ||
      int(data.b.size()) != g.nt || int(data.d.size()) != g.nt)
    throw ConfigError("picard_constant_coefficient: data series must have " + std::to_string(g.nt) + " levels");

  IterationResult out;
  StokesData sd{data.f, data.rho, data.u0, data.b, data.d, reference_normal(g)};
  for (const auto& item : stokes_compatibility(sd, config.nu, config.tol_compat))
    if (!item.ok) out.warnings.push_back("compatibility violated: " + item.name + " = " + fmt(item.residual));

  const Engines eng(g, config);
  out.state = MHDState::zero(g, config);
  out.trace = iterate_until_contracted(out.state, config, [&](const MHDState& s) {
    VectorSeries f, gs;
    for (int n = 0; n < g.nt; ++n) {
      f.push_back(g.t(n), data.f.u[n] + advective_derivative(s.B.u[n], s.B.u[n]));
      gs.push_back(g.t(n), data.g.u[n] + advective_derivative(s.B.u[n], s.v.u[n]));
    }
    MHDState next = solve_linear(eng, g, data.u0, data.H0, f, data.rho, data.b, data.d, gs);
    next.h = s.h;
    next.deformation = s.deformation;
    return next;
  });
  return out;
}

CorrectionTerms build_correction_terms(const MHDState& state_m, const MHDState& base, const IterationConfig& config) {
  const std::size_t levels = state_m.v.size();
  const double nu = config.nu, lambda = config.lambda;
  std::vector<DeformationState> computed;
  const std::vector<DeformationState>* def = &state_m.deformation;
  if (def->size() != levels) {
    computed = deformation_history(state_m.v.u, config.dt, config.jac_floor);
    def = &computed;
  }

  const Grid& g = state_m.v.grid();
  const int top = g.nz - 1;
  const SurfaceVectorField n0 = reference_normal(g);
  CorrectionTerms c;
  for (std::size_t n = 0; n < levels; ++n) {
    const double t = state_m.v.t[n];
    const TensorField& G = (*def)[n].g_mat;
    const VectorField& v = state_m.v.u[n];
    const VectorField& B = state_m.B.u[n];
    const ScalarField& q = state_m.q.u[n];

    const TensorField tv = transformed_velocity_gradient(G, v);
    const TensorField tB = transformed_velocity_gradient(G, B);

    VectorField f = nu * (transformed_laplacian(G, v) - wide_laplacian(v));
    f += gradient(q) - transformed_gradient(G, q);
    f += contract(B, tB);
    f -= advective_derivative(base.B.u[n], base.B.u[n]);

    VectorField gsrc = lambda * (transformed_laplacian(G, B) - wide_laplacian(B));
    gsrc += contract(B, tv);
    gsrc -= advective_derivative(base.B.u[n], base.v.u[n]);

    ScalarField rho = divergence(v) - transformed_divergence(G, v);

    VectorField R(g);
    for (int i = 0; i < 3; ++i) {
      R[i] = v[i];
      for (int j = 0; j < 3; ++j) R[i] -= G(i, j) * v[j];
    }

    // Stress mismatches on the top face.
    const TensorField grad = velocity_gradient(v);
    const SurfaceVectorField nm = transformed_normal(G, n0);
    SurfaceField b(g);
    SurfaceVectorField d = zero_surface_vector(g);
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j) {
        const Eigen::Index p = g.index(i, j, top);
        const Eigen::Index s = g.column(i, j);
        const Eigen::Matrix3d gr = grad.at(p), tm = tv.at(p);
        const Eigen::Matrix3d D0 = 0.5 * (gr + gr.transpose());
        const Eigen::Matrix3d Dm = 0.5 * (tm + tm.transpose());
        const Eigen::Vector3d e(n0[0].values()[s], n0[1].values()[s], n0[2].values()[s]);
        const Eigen::Vector3d nn(nm[0].values()[s], nm[1].values()[s], nm[2].values()[s]);
        const Eigen::Vector3d s0 = D0 * e, sm = Dm * nn;
        b.values()[s] = 2.0 * nu * (s0.dot(e) - sm.dot(nn));
        Eigen::Vector3d dv = 2.0 * nu * ((s0 - s0.dot(e) * e) - (sm - sm.dot(nn) * nn));
        dv -= dv.dot(e) * e;  // only the part tangential to n0 enters the linear system
        for (int r = 0; r < 3; ++r) d[r].values()[s] = dv[r];
      }

    c.f.push_back(t, std::move(f));
    c.g.push_back(t, std::move(gsrc));
    c.rho.push_back(t, std::move(rho));
    c.R.push_back(t, std::move(R));
    c.b.push_back(t, std::move(b));
    c.d.push_back(std::move(d));
  }
  return c;
}

SurfaceField update_surface(const SurfaceField& h, const VectorField& v, double dt) {
  const SurfaceVectorField vt = trace_top(v);
  const SurfaceField hx = surface_partial(h, 0), hy = surface_partial(h, 1);
  SurfaceField out = h;
  out.values() += dt * (vt[2].values() - vt[0].values() * hx.values() - vt[1].values() * hy.values());
  return out;
}

SurfaceSeries surface_history(const SurfaceField& h0, const VectorSeries& v) {
  SurfaceSeries h;
  h.push_back(v.t.front(), h0);
  for (std::size_t n = 1; n < v.size(); ++n)
    h.push_back(v.t[n], update_surface(h.u.back(), v.u[n - 1], v.t[n] - v.t[n - 1]));
  return h;
}

FullSolverResult picard_full_nonlinear(const VectorField& u0, const VectorField& H0, const SurfaceField& h0,
                                       const IterationConfig& config, const DeformationState* initial) {
  config.validate();
  const Grid g = time_grid(u0.grid(), config);
  require_same_space(g, H0.grid(), "picard_full_nonlinear");
  require_finite(u0, "picard_full_nonlinear");
  require_finite(H0, "picard_full_nonlinear");
  FullSolverResult out;

  // Base problem: flat data except the gravity term of the initial surface.
  ConstantCoefficientData base_data = ConstantCoefficientData::zero(g, config);
  for (auto& b : base_data.b.u) b = -config.g_grav * h0;
  IterationResult base = picard_constant_coefficient(base_data, config);
  out.base = std::move(base.state);
  out.base.h = constant_series(g, h0);
  out.base.deformation = deformation_history(out.base.v.u, config.dt, config.jac_floor, initial);

  // Compatibility of the initial data: divergence and tangential stress in the
  // metric of the initial flow map.
  {
    MHDState first;
    first.v.push_back(0.0, u0);
    first.B.push_back(0.0, H0);
    first.q.push_back(0.0, ScalarField(g));
    first.deformation = {initial ? *initial : DeformationState::initial(g)};
    MHDState flat = first;
    flat.B.u[0] = VectorField(g);
    flat.v.u[0] = VectorField(g);
    const CorrectionTerms c0 = build_correction_terms(first, flat, config);
    StokesData sd{c0.f, c0.rho, u0, c0.b, c0.d, reference_normal(g)};
    for (const auto& item : stokes_compatibility(sd, config.nu, config.tol_compat))
      if (!item.ok)
        throw ConfigError("compatibility violated: " + item.name + " = " + fmt(item.residual) + " exceeds tol_compat");
    const double div_h = max_abs(transformed_divergence(first.deformation[0].g_mat, H0));
    if (div_h > config.tol_compat)
      out.warnings.push_back("div H0 = " + fmt(div_h) + " exceeds tol_compat; it diffuses but is not removed");
  }
  double face = 0.0;
  for (int c = 0; c < 3; ++c)
    for (Eigen::Index col = 0; col < g.plane_size(); ++col)
      face = std::max({face, std::abs(H0[c].values()[col * g.nz]), std::abs(H0[c].values()[col * g.nz + g.nz - 1])});
  if (face > config.tol_compat)
    out.warnings.push_back("H0 does not vanish on the faces (max " + fmt(face) + "); the first heat step projects it");

  const Engines eng(g, config);
  out.state = out.base;
  out.state.iterate = 0;
  out.trace = iterate_until_contracted(out.state, config, [&](const MHDState& s) {
    const CorrectionTerms c = build_correction_terms(s, out.base, config);
    SurfaceSeries b = c.b;
    for (std::size_t n = 0; n < b.size(); ++n) b.u[n] -= config.g_grav * s.h.u[n];
    MHDState next = solve_linear(eng, g, u0, H0, c.f, c.rho, b, c.d, c.g);
    if (s.iterate == 0) {
      // The gate applies to the linear solution for the given data.
      out.smallness = check_smallness(next.v, config);
      if (!out.smallness.ok)
        out.warnings.push_back("smallness gate failed for the first iterate: T^(1/2) ||v|| = " +
                               fmt(out.smallness.value) + " > delta = " + fmt(config.delta));
    }
    next.h = surface_history(h0, next.v);
    next.deformation = deformation_history(next.v.u, config.dt, config.jac_floor, initial);
    return next;
  });
  return out;
}

FullRun run_full_solver(const VectorField& u0, const VectorField& H0, const SurfaceField& h0,
                        const IterationConfig& config, const DeformationState* initial) {
  FullRun run{picard_full_nonlinear(u0, H0, h0, config, initial), {}, 0.0, 0.0, 0.0};
  const MHDState& s = run.result.state;
  const int stride = config.norm_stride;
  const double l = config.l;
  const ScalarSeries qs = subsample(s.q, stride);
  VectorSeries grad_q;
  for (std::size_t n = 0; n < qs.size(); ++n) grad_q.push_back(qs.t[n], gradient(qs.u[n]));

  NormReport& r = run.report;
  r.l = l;
  r.gamma = config.gamma;
  r.T = config.T;
  r.grid = describe(u0.grid());
  r.set("v_solution", solution_norm(subsample(s.v, stride), l));
  r.set("B_solution", solution_norm(subsample(s.B, stride), l));
  r.set("grad_q_triple", triple_norm(grad_q, l));
  r.set("q_boundary", boundary_norm(subsample(s.q_surface, stride), l));
  r.set("u0_data", sobolev_norm(u0, l + 1.0));
  r.set("H0_data", sobolev_norm(H0, l + 1.0));
  r.set("h0_data", sobolev_norm(h0, l + 1.5));
  run.lhs = r.values["v_solution"] + r.values["B_solution"] + r.values["grad_q_triple"] + r.values["q_boundary"];
  run.rhs = r.values["u0_data"] + r.values["H0_data"] + r.values["h0_data"];
  run.c0 = run.rhs > 0.0 ? run.lhs / run.rhs : 0.0;
  r.set("lhs", run.lhs);
  r.set("rhs", run.rhs);
  r.set("c0", run.c0);
  return run;
}

double SystemResiduals::max() const {
  return std::max({momentum, induction, continuity, normal_stress, tangential_stress, magnetic_boundary});
}

namespace {

double interior_sq(const ScalarField& f) {
  const Grid& g = f.grid();
  double s = 0.0;
  for (Eigen::Index c = 0; c < g.plane_size(); ++c)
    for (int k = 1; k < g.nz - 1; ++k) s += g.cell_weight(k) * f.values()[c * g.nz + k] * f.values()[c * g.nz + k];
  return s;
}

double interior_sq(const VectorField& v) { return interior_sq(v[0]) + interior_sq(v[1]) + interior_sq(v[2]); }

double surface_sq(const SurfaceField& s) {
  const double n = l2_norm(s);
  return n * n;
}

double ratio(double res_sq, double scale_sq) {
  return scale_sq > 0.0 ? std::sqrt(res_sq / scale_sq) : std::sqrt(res_sq);
}

}  // namespace

SystemResiduals system_residuals(const MHDState& state, const IterationConfig& config) {
  const std::size_t levels = state.v.size();
  const Grid& g = state.v.grid();
  const int top = g.nz - 1;
  const double nu = config.nu, lambda = config.lambda;
  const std::vector<DeformationState> def = state.deformation.size() == levels
                                                ? state.deformation
                                                : deformation_history(state.v.u, config.dt, config.jac_floor);
  const SurfaceVectorField n0 = reference_normal(g);

  double mom = 0, mom_s = 0, ind = 0, ind_s = 0, con = 0, con_s = 0;
  double nor = 0, nor_s = 0, tan = 0, tan_s = 0, mag = 0, mag_s = 0;
  for (std::size_t n = 1; n < levels; ++n) {
    const double dt = state.v.t[n] - state.v.t[n - 1];
    const TensorField& G = def[n].g_mat;
    const VectorField& v = state.v.u[n];
    const VectorField& B = state.B.u[n];
    const ScalarField& q = state.q.u[n];
    const TensorField tv = transformed_velocity_gradient(G, v);
    const TensorField tB = transformed_velocity_gradient(G, B);

    // Transformed Laplacian, with the compact vertical stencil standing in for
    // the flat part as in the implicit step.
    const VectorField lap_v = laplacian_compact(v) + transformed_laplacian(G, v) - wide_laplacian(v);
    const VectorField lap_B = laplacian_compact(B) + transformed_laplacian(G, B) - wide_laplacian(B);

    const VectorField accel = (1.0 / dt) * (v - state.v.u[n - 1]);
    const VectorField visc = nu * lap_v;
    const VectorField press = transformed_gradient(G, q);
    const VectorField lorentz = contract(B, tB);
    mom += dt * interior_sq(accel - visc + press - lorentz);
    mom_s += dt * std::max({interior_sq(accel), interior_sq(visc), interior_sq(press), interior_sq(lorentz)});

    const VectorField dB = (1.0 / dt) * (B - state.B.u[n - 1]);
    const VectorField diff = lambda * lap_B;
    const VectorField stretch = contract(B, tv);
    ind += dt * interior_sq(dB - diff - stretch);
    ind_s += dt * std::max({interior_sq(dB), interior_sq(diff), interior_sq(stretch)});

    ScalarField div = transformed_divergence(G, v);
    con += dt * interior_sq(div);
    for (int i = 0; i < 3; ++i) con_s += dt * interior_sq(tv(i, i));

    const SurfaceVectorField nm = transformed_normal(G, n0);
    const SurfaceField& h = state.h.u[n];
    SurfaceField rn(g), stress_n(g);
    SurfaceVectorField rt = zero_surface_vector(g), st = zero_surface_vector(g);
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j) {
        const Eigen::Index p = g.index(i, j, top);
        const Eigen::Index s = g.column(i, j);
        const Eigen::Matrix3d tm = tv.at(p);
        const Eigen::Matrix3d Dm = 0.5 * (tm + tm.transpose());
        const Eigen::Vector3d nn(nm[0].values()[s], nm[1].values()[s], nm[2].values()[s]);
        const Eigen::Vector3d sm = 2.0 * nu * (Dm * nn);
        const double qv = q.values()[p];
        rn.values()[s] = qv - sm.dot(nn) - config.g_grav * h.values()[s];
        stress_n.values()[s] = std::max({std::abs(qv), std::abs(sm.dot(nn)), std::abs(config.g_grav * h.values()[s])});
        const Eigen::Vector3d tang = sm - sm.dot(nn) * nn;
        for (int r = 0; r < 3; ++r) {
          rt[r].values()[s] = tang[r];
          st[r].values()[s] = nu * tm.row(r).norm();
        }
      }
    nor += dt * surface_sq(rn);
    nor_s += dt * surface_sq(stress_n);
    for (int r = 0; r < 3; ++r) {
      tan += dt * surface_sq(rt[r]);
      tan_s += dt * surface_sq(st[r]);
    }

    for (int c = 0; c < 3; ++c)
      for (Eigen::Index col = 0; col < g.plane_size(); ++col) {
        const double bot = B[c].values()[col * g.nz], up = B[c].values()[col * g.nz + top];
        mag = std::max({mag, std::abs(bot), std::abs(up)});
      }
    mag_s = std::max(mag_s, max_abs(B));
  }
  SystemResiduals r;
  r.momentum = ratio(mom, mom_s);
  r.induction = ratio(ind, ind_s);
  r.continuity = ratio(con, con_s);
  r.normal_stress = ratio(nor, nor_s);
  r.tangential_stress = ratio(tan, tan_s);
  r.magnetic_boundary = mag_s > 0.0 ? mag / mag_s : mag;
  return r;
}

}  // namespace mhdlag
