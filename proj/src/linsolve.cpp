#include "mhdlag/linsolve.hpp"

#include "mhdlag/parallel.hpp"
#include "mhdlag/spectral.hpp"

#include <cmath>
#include <sstream>

namespace mhdlag {

namespace {

const Complex I(0.0, 1.0);

struct ModeBasis {
  double kappa;
  double par[2];
  double perp[2];
};

ModeBasis mode_basis(const HorizontalTransform& tr, int i, int j) {
  const double kx = tr.kx_eff(i), ky = tr.ky_eff(j);
  const double kappa = std::hypot(kx, ky);
  if (kappa == 0.0) return {0.0, {1.0, 0.0}, {0.0, 1.0}};
  return {kappa, {kx / kappa, ky / kappa}, {-ky / kappa, kx / kappa}};
}

double kappa_sq(const HorizontalTransform& tr, int i, int j) {
  const double kx = tr.kx_eff(i), ky = tr.ky_eff(j);
  return kx * kx + ky * ky;
}

std::string mode_label(int i, int j, double k2) {
  std::ostringstream os;
  os << "wavenumber index (" << i << "," << j << "), |k|^2 = " << k2;
  return os.str();
}

void check_dt(double dt, const char* where) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw FieldError(std::string(where) + ": dt must be positive");
}

double uniform_step(const std::vector<double>& t, const char* where) {
  if (t.size() < 2) throw FieldError(std::string(where) + ": need at least two time levels");
  const double dt = t[1] - t[0];
  for (std::size_t n = 1; n < t.size(); ++n)
    if (std::abs((t[n] - t[n - 1]) - dt) > 1e-9 * dt)
      throw FieldError(std::string(where) + ": time levels must be uniformly spaced");
  check_dt(dt, where);
  return dt;
}

}  // namespace

// ---------------------------------------------------------------------------
// Stokes

struct StokesStepper::Factor {
  BandedLU main;  // (w, v3, q) interleaved per node
  BandedLU perp;  // across component
};

StokesStepper::StokesStepper(const Grid& grid, double nu, double dt, BottomCondition bottom)
    : grid_(grid), nu_(nu), dt_(dt), bottom_(bottom) {
  grid_.validate();
  check_dt(dt, "StokesStepper");
  if (!(nu > 0.0)) throw FieldError("StokesStepper: nu must be positive");
  const int nz = grid_.nz;
  const double hz = grid_.hz();
  HorizontalTransform tr(grid_);

  std::vector<double> keys;
  for (int i = 0; i < grid_.nx; ++i)
    for (int j = 0; j < grid_.ny; ++j) {
      const double k2 = kappa_sq(tr, i, j);
      if (!factors_.count(k2)) {
        factors_[k2] = nullptr;
        keys.push_back(k2);
      }
    }

  std::vector<std::shared_ptr<const Factor>> built(keys.size());
  std::vector<std::string> failures(keys.size());
  parallel_for(keys.size(), [&](std::size_t n) {
    const double k2 = keys[n];
    const double kappa = std::sqrt(k2);
    const double a = 1.0 / dt + nu * k2;
    BandedMatrix m(3 * nz, 11, 11);
    auto row = [](int k, int c) { return 3 * k + c; };
    auto zmom = [&](int r, int k) {
      m.add(r, row(k, 1), a);
      vertical::second_derivative_row(k, nz, hz, [&](int c, double w) { m.add(r, row(c, 1), -nu * w); });
      vertical::first_derivative_row(k, nz, hz, [&](int c, double w) { m.add(r, row(c, 2), w); });
    };
    // Rows per node: slot 0 parallel momentum or a tangential condition,
    // slot 1 vertical momentum or a kinematic/normal condition, slot 2
    // continuity. The faces close slot 2 with vertical momentum instead,
    // which pins the odd-even pressure mode at both ends.
    for (int k = 0; k < nz; ++k) {
      if (k == 0) {
        if (bottom == BottomCondition::free_slip)
          vertical::first_derivative_row(0, nz, hz, [&](int c, double w) { m.add(row(0, 0), row(c, 0), w); });
        else
          m.add(row(0, 0), row(0, 0), 1.0);
        m.add(row(0, 1), row(0, 1), 1.0);
        zmom(row(0, 2), 0);
      } else if (k == nz - 1) {
        vertical::first_derivative_row(k, nz, hz, [&](int c, double w) { m.add(row(k, 0), row(c, 0), nu * w); });
        m.add(row(k, 0), row(k, 1), nu * kappa);
        m.add(row(k, 1), row(k, 2), -1.0);
        vertical::first_derivative_row(k, nz, hz, [&](int c, double w) { m.add(row(k, 1), row(c, 1), 2.0 * nu * w); });
        zmom(row(k, 2), k);
      } else {
        m.add(row(k, 0), row(k, 0), a);
        vertical::second_derivative_row(k, nz, hz, [&](int c, double w) { m.add(row(k, 0), row(c, 0), -nu * w); });
        m.add(row(k, 0), row(k, 2), kappa);
        zmom(row(k, 1), k);
        m.add(row(k, 2), row(k, 0), -kappa);
        vertical::first_derivative_row(k, nz, hz, [&](int c, double w) { m.add(row(k, 2), row(c, 1), w); });
      }
    }

    BandedMatrix p(nz, 2, 2);
    for (int k = 0; k < nz; ++k) {
      if (k == 0) {
        if (bottom == BottomCondition::free_slip)
          vertical::first_derivative_row(0, nz, hz, [&](int c, double w) { p.add(0, c, w); });
        else
          p.add(0, 0, 1.0);
      } else if (k == nz - 1) {
        vertical::first_derivative_row(k, nz, hz, [&](int c, double w) { p.add(k, c, nu * w); });
      } else {
        p.add(k, k, a);
        vertical::second_derivative_row(k, nz, hz, [&](int c, double w) { p.add(k, c, -nu * w); });
      }
    }
    try {
      built[n] = std::make_shared<Factor>(Factor{BandedLU(std::move(m)), BandedLU(std::move(p))});
    } catch (const SingularSystemError& e) {
      failures[n] = e.what();
    }
  });

  for (std::size_t n = 0; n < keys.size(); ++n) {
    if (!failures[n].empty()) {
      for (int i = 0; i < grid_.nx; ++i)
        for (int j = 0; j < grid_.ny; ++j)
          if (kappa_sq(tr, i, j) == keys[n])
            throw SingularSystemError("Stokes system singular at " + mode_label(i, j, keys[n]) + ": " + failures[n]);
    }
    factors_[keys[n]] = built[n];
  }
  by_mode_.resize(grid_.plane_size());
  for (int i = 0; i < grid_.nx; ++i)
    for (int j = 0; j < grid_.ny; ++j) by_mode_[grid_.column(i, j)] = factors_.at(kappa_sq(tr, i, j)).get();
}

StokesStepper::Result StokesStepper::step(const VectorField& v_prev, const VectorField& f, const ScalarField& rho,
                                          const SurfaceField& b, const SurfaceVectorField& d, int step_index) const {
  require_same_space(grid_, v_prev.grid(), "StokesStepper::step");
  require_same_space(grid_, f.grid(), "StokesStepper::step");
  require_same_space(grid_, rho.grid(), "StokesStepper::step");
  require_finite(v_prev, "StokesStepper::step");
  require_finite(f, "StokesStepper::step");
  require_finite(rho, "StokesStepper::step");

  const Grid& g = grid_;
  const int nz = g.nz;
  HorizontalTransform tr(g);
  std::array<SpectralArray, 3> r;
  for (int c = 0; c < 3; ++c) {
    ScalarField rc = f[c];
    rc.values() += v_prev[c].values() / dt_;
    r[c] = tr.forward(rc);
  }
  const SpectralArray rh = tr.forward(rho);
  const SpectralArray bh = tr.forward(b);
  const SpectralArray d0 = tr.forward(d[0]);
  const SpectralArray d1 = tr.forward(d[1]);

  std::array<SpectralArray, 3> vh;
  for (auto& c : vh) c = SpectralArray::Zero(g.size());
  SpectralArray qh = SpectralArray::Zero(g.size());

  parallel_for(std::size_t(g.plane_size()), [&](std::size_t m) {
    const int i = int(m) / g.ny, j = int(m) % g.ny;
    const ModeBasis e = mode_basis(tr, i, j);
    const Factor& fac = *by_mode_[m];
    const Eigen::Index base = Eigen::Index(m) * nz;
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(3 * nz);
    Eigen::VectorXcd yp = Eigen::VectorXcd::Zero(nz);
    for (int k = 0; k < nz; ++k) {
      const Complex r_par = e.par[0] * r[0][base + k] + e.par[1] * r[1][base + k];
      const Complex r_perp = e.perp[0] * r[0][base + k] + e.perp[1] * r[1][base + k];
      if (k == 0) {
        y[2] = r[2][base];
      } else if (k == nz - 1) {
        const Complex d_par = e.par[0] * d0[Eigen::Index(m)] + e.par[1] * d1[Eigen::Index(m)];
        const Complex d_perp = e.perp[0] * d0[Eigen::Index(m)] + e.perp[1] * d1[Eigen::Index(m)];
        y[3 * k] = -I * d_par;
        y[3 * k + 1] = bh[Eigen::Index(m)];
        y[3 * k + 2] = r[2][base + k];
        yp[k] = d_perp;
      } else {
        y[3 * k] = -I * r_par;
        y[3 * k + 1] = r[2][base + k];
        y[3 * k + 2] = rh[base + k];
        yp[k] = r_perp;
      }
    }
    fac.main.solve_in_place(y.data());
    fac.perp.solve_in_place(yp.data());
    for (int k = 0; k < nz; ++k) {
      const Complex v_par = I * y[3 * k];
      vh[0][base + k] = e.par[0] * v_par + e.perp[0] * yp[k];
      vh[1][base + k] = e.par[1] * v_par + e.perp[1] * yp[k];
      vh[2][base + k] = y[3 * k + 1];
      qh[base + k] = y[3 * k + 2];
    }
  });

  Result out{VectorField(g), ScalarField(g, tr.inverse(qh, nz))};
  for (int c = 0; c < 3; ++c) out.v[c] = ScalarField(g, tr.inverse(vh[c], nz));
  if (!out.v.all_finite() || !out.q.all_finite()) {
    std::ostringstream os;
    os << "Stokes step " << step_index << " produced non-finite values";
    throw FieldError(os.str());
  }
  return out;
}

StokesData StokesData::zero(const Grid& grid) {
  StokesData d;
  for (int n = 0; n < grid.nt; ++n) {
    const double t = grid.t(n);
    d.f.push_back(t, VectorField(grid));
    d.rho.push_back(t, ScalarField(grid));
    d.b.push_back(t, SurfaceField(grid));
    d.d.push_back({SurfaceField(grid), SurfaceField(grid), SurfaceField(grid)});
  }
  d.u0 = VectorField(grid);
  d.n0 = {SurfaceField(grid), SurfaceField(grid), SurfaceField(grid, 1.0)};
  return d;
}

std::vector<CompatItem> stokes_compatibility(const StokesData& data, double nu, double tol) {
  const Grid& g = data.u0.grid();
  std::vector<CompatItem> items;
  auto add = [&](const std::string& name, double value) { items.push_back({name, value, value <= tol}); };
  // Interior nodes only: the face nodes carry boundary rows, not continuity.
  const ScalarField div0 = divergence(data.u0) - data.rho.u.front();
  double div_worst = 0.0;
  for (Eigen::Index c = 0; c < g.plane_size(); ++c)
    for (int k = 1; k < g.nz - 1; ++k) div_worst = std::max(div_worst, std::abs(div0.values()[c * g.nz + k]));
  add("div_u0_minus_rho0", div_worst);

  const TensorField du = velocity_gradient(data.u0);
  // 2 nu [D(u0) n0 - (D(u0) n0 . n0) n0] against d(0), pointwise on the face.
  double stress = 0.0, normal_part = 0.0;
  const auto& d0 = data.d.front();
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const Eigen::Index p = g.index(i, j, g.nz - 1), c = g.column(i, j);
      const Eigen::Matrix3d grad = du.at(p);
      const Eigen::Matrix3d D = 0.5 * (grad + grad.transpose());
      const Eigen::Vector3d n(data.n0[0].values()[c], data.n0[1].values()[c], data.n0[2].values()[c]);
      const Eigen::Vector3d dn = D * n;
      const Eigen::Vector3d tang = 2.0 * nu * (dn - dn.dot(n) * n);
      const Eigen::Vector3d dd(d0[0].values()[c], d0[1].values()[c], d0[2].values()[c]);
      stress = std::max(stress, (tang - dd).cwiseAbs().maxCoeff());
      normal_part = std::max(normal_part, std::abs(dd.dot(n)));
    }
  add("tangential_stress_t0", stress);
  double worst_tangency = normal_part;
  for (const auto& dn : data.d)
    for (Eigen::Index c = 0; c < g.plane_size(); ++c) {
      const double dot = dn[0].values()[c] * data.n0[0].values()[c] + dn[1].values()[c] * data.n0[1].values()[c] +
                         dn[2].values()[c] * data.n0[2].values()[c];
      worst_tangency = std::max(worst_tangency, std::abs(dot));
    }
  add("d_dot_n0", worst_tangency);
  return items;
}

StokesSolution solve_stokes(const StokesData& data, double nu, BottomCondition bottom, double tol_compat) {
  const std::size_t levels = data.f.size();
  if (data.rho.size() != levels || data.b.size() != levels || data.d.size() != levels)
    throw FieldError("solve_stokes: data series lengths differ");
  const double dt = uniform_step(data.f.t, "solve_stokes");
  const Grid& g = data.u0.grid();
  require_finite(data.u0, "solve_stokes");

  StokesSolution sol;
  sol.compat = stokes_compatibility(data, nu, tol_compat);
  for (const auto& item : sol.compat)
    if (!item.ok) {
      sol.flagged = true;
      sol.warnings.push_back("compatibility violated: " + item.name + " = " + std::to_string(item.residual));
    }

  const StokesStepper stepper(g, nu, dt, bottom);
  sol.v.push_back(data.f.t[0], data.u0);
  std::vector<ScalarField> q(levels);
  for (std::size_t n = 1; n < levels; ++n) {
    auto res = stepper.step(sol.v.u.back(), data.f.u[n], data.rho.u[n], data.b.u[n], data.d[n], int(n));
    sol.v.push_back(data.f.t[n], std::move(res.v));
    q[n] = std::move(res.q);
  }
  // The scheme defines no pressure at t = 0; the first step's value is used.
  q[0] = q[1];
  for (std::size_t n = 0; n < levels; ++n) {
    sol.q_surface.push_back(data.f.t[n], trace_top(q[n]));
    sol.q.push_back(data.f.t[n], std::move(q[n]));
  }
  return sol;
}

namespace {

double interior_l2(const ScalarField& f, int k_begin, int k_end) {
  const Grid& g = f.grid();
  double s = 0.0;
  for (Eigen::Index c = 0; c < g.plane_size(); ++c)
    for (int k = k_begin; k < k_end; ++k) s += g.cell_weight(k) * f.values()[c * g.nz + k] * f.values()[c * g.nz + k];
  return std::sqrt(s);
}

double interior_l2(const VectorField& v, int k_begin, int k_end) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c) s += std::pow(interior_l2(v[c], k_begin, k_end), 2);
  return std::sqrt(s);
}

double relative(double residual, double scale) { return scale > 0.0 ? residual / scale : residual; }

}  // namespace

StokesResiduals stokes_step_residuals(const VectorField& v_prev, const VectorField& v, const ScalarField& q,
                                      const VectorField& f, const ScalarField& rho, const SurfaceField& b,
                                      const SurfaceVectorField& d, double nu, double dt) {
  const Grid& g = v.grid();
  const int nz = g.nz;
  StokesResiduals r;
  VectorField accel = v - v_prev;
  accel *= 1.0 / dt;
  VectorField visc = laplacian_compact(v);
  visc *= nu;
  const VectorField gq = gradient(q);
  const VectorField mom = accel - visc + gq - f;
  r.momentum = relative(interior_l2(mom, 1, nz - 1), interior_l2(accel, 1, nz - 1) + interior_l2(visc, 1, nz - 1) +
                                                         interior_l2(gq, 1, nz - 1) + interior_l2(f, 1, nz - 1));
  const ScalarField div = divergence(v);
  r.continuity = relative(interior_l2(div - rho, 1, nz - 1), interior_l2(v, 0, nz) + interior_l2(rho, 1, nz - 1));

  double tang = 0.0, tang_scale = 0.0;
  for (int c = 0; c < 2; ++c) {
    const SurfaceField dz = trace_top(partial(v[c], 2));
    const SurfaceField dh = trace_top(partial(v[2], c));
    SurfaceField res = dz + dh;
    res *= nu;
    res -= d[c];
    tang += surface_inner(res, res);
    tang_scale += nu * (l2_norm(dz) + l2_norm(dh)) + l2_norm(d[c]);
  }
  r.tangential = relative(std::sqrt(tang), tang_scale);
  const SurfaceField qs = trace_top(q);
  SurfaceField dz3 = trace_top(partial(v[2], 2));
  dz3 *= 2.0 * nu;
  const SurfaceField normal = dz3 - qs - b;
  r.normal = relative(l2_norm(normal), l2_norm(qs) + l2_norm(dz3) + l2_norm(b));
  return r;
}

// ---------------------------------------------------------------------------
// Heat

HeatStepper::HeatStepper(const Grid& grid, double lambda, double dt) : grid_(grid), lambda_(lambda), dt_(dt) {
  grid_.validate();
  check_dt(dt, "HeatStepper");
  if (!(lambda > 0.0)) throw FieldError("HeatStepper: lambda must be positive");
  const int nz = grid_.nz;
  const double hz = grid_.hz();
  HorizontalTransform tr(grid_);
  for (int i = 0; i < grid_.nx; ++i)
    for (int j = 0; j < grid_.ny; ++j) {
      const double k2 = kappa_sq(tr, i, j);
      if (factors_.count(k2)) continue;
      BandedMatrix m(nz, 1, 1);
      m.add(0, 0, 1.0);
      m.add(nz - 1, nz - 1, 1.0);
      for (int k = 1; k < nz - 1; ++k) {
        m.add(k, k, 1.0 + dt * lambda * k2);
        vertical::second_derivative_row(k, nz, hz, [&](int c, double w) { m.add(k, c, -dt * lambda * w); });
      }
      try {
        factors_[k2] = std::make_shared<BandedLU>(std::move(m));
      } catch (const SingularSystemError& e) {
        throw SingularSystemError("heat system singular at " + mode_label(i, j, k2) + ": " + e.what());
      }
    }
  by_mode_.resize(grid_.plane_size());
  for (int i = 0; i < grid_.nx; ++i)
    for (int j = 0; j < grid_.ny; ++j) by_mode_[grid_.column(i, j)] = factors_.at(kappa_sq(tr, i, j)).get();
}

ScalarField HeatStepper::propagate(const ScalarField& x) const {
  require_same_space(grid_, x.grid(), "HeatStepper");
  require_finite(x, "HeatStepper");
  const int nz = grid_.nz;
  HorizontalTransform tr(grid_);
  SpectralArray xh = tr.forward(x);
  parallel_for(std::size_t(grid_.plane_size()), [&](std::size_t m) {
    Complex* col = xh.data() + m * nz;
    col[0] = 0.0;
    col[nz - 1] = 0.0;
    by_mode_[m]->solve_in_place(col);
  });
  return ScalarField(grid_, tr.inverse(xh, nz));
}

VectorField HeatStepper::propagate(const VectorField& x) const {
  return VectorField(propagate(x[0]), propagate(x[1]), propagate(x[2]));
}

ScalarField HeatStepper::step(const ScalarField& b_prev, const ScalarField& g) const {
  ScalarField x = g;
  x *= dt_;
  x += b_prev;
  return propagate(x);
}

VectorField HeatStepper::step(const VectorField& b_prev, const VectorField& g) const {
  return VectorField(step(b_prev[0], g[0]), step(b_prev[1], g[1]), step(b_prev[2], g[2]));
}

namespace {

std::vector<std::string> heat_trace_warnings(const VectorField& H0) {
  std::vector<std::string> w;
  const Grid& g = H0.grid();
  double top = 0.0, bottom = 0.0;
  for (int c = 0; c < 3; ++c)
    for (Eigen::Index col = 0; col < g.plane_size(); ++col) {
      top = std::max(top, std::abs(H0[c].values()[col * g.nz + g.nz - 1]));
      bottom = std::max(bottom, std::abs(H0[c].values()[col * g.nz]));
    }
  if (top > 1e-8) w.push_back("initial field does not vanish on the top face (max " + std::to_string(top) + ")");
  if (bottom > 1e-8) w.push_back("initial field does not vanish on the bottom face (max " + std::to_string(bottom) + ")");
  return w;
}

}  // namespace

HeatSolution solve_heat_dirichlet(const VectorSeries& gsrc, const VectorField& H0, double lambda) {
  const double dt = uniform_step(gsrc.t, "solve_heat_dirichlet");
  require_finite(H0, "solve_heat_dirichlet");
  HeatSolution sol;
  sol.warnings = heat_trace_warnings(H0);
  const HeatStepper stepper(H0.grid(), lambda, dt);
  sol.B.push_back(gsrc.t[0], H0);
  for (std::size_t n = 1; n < gsrc.size(); ++n) {
    VectorField next = stepper.step(sol.B.u.back(), gsrc.u[n]);
    require_finite(next, "solve_heat_dirichlet");
    sol.B.push_back(gsrc.t[n], std::move(next));
  }
  return sol;
}

VectorSeries heat_duhamel(const VectorSeries& gsrc, const VectorField& H0, double lambda) {
  const double dt = uniform_step(gsrc.t, "heat_duhamel");
  const HeatStepper stepper(H0.grid(), lambda, dt);
  VectorSeries out;
  out.push_back(gsrc.t[0], H0);
  for (std::size_t n = 1; n < gsrc.size(); ++n) {
    VectorField acc = H0;
    for (std::size_t s = 0; s < n; ++s) acc = stepper.propagate(acc);
    for (std::size_t j = 1; j <= n; ++j) {
      VectorField term = gsrc.u[j];
      term *= dt;
      for (std::size_t s = 0; s < n - j + 1; ++s) term = stepper.propagate(term);
      acc += term;
    }
    out.push_back(gsrc.t[n], std::move(acc));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Poisson

ScalarField solve_poisson_dirichlet(const ScalarField& rho) {
  require_finite(rho, "solve_poisson_dirichlet");
  const Grid& g = rho.grid();
  const int nz = g.nz;
  const double hz = g.hz();
  HorizontalTransform tr(g);

  // D1 as a dense nz x nz matrix; the wide second derivative is D1 * D1.
  Eigen::MatrixXd d1 = Eigen::MatrixXd::Zero(nz, nz);
  for (int k = 0; k < nz; ++k) vertical::first_derivative_row(k, nz, hz, [&](int c, double w) { d1(k, c) += w; });
  const Eigen::MatrixXd d2 = d1 * d1;

  std::map<double, std::shared_ptr<const BandedLU>> factors;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const double k2 = kappa_sq(tr, i, j);
      if (factors.count(k2)) continue;
      BandedMatrix m(nz, 3, 3);
      m.add(0, 0, 1.0);
      m.add(nz - 1, nz - 1, 1.0);
      for (int k = 1; k < nz - 1; ++k) {
        m.add(k, k, -k2);
        for (int c = std::max(0, k - 3); c <= std::min(nz - 1, k + 3); ++c)
          if (d2(k, c) != 0.0) m.add(k, c, d2(k, c));
      }
      try {
        factors[k2] = std::make_shared<BandedLU>(std::move(m));
      } catch (const SingularSystemError& e) {
        throw SingularSystemError("Poisson system singular at " + mode_label(i, j, k2) + ": " + e.what());
      }
    }

  SpectralArray rh = tr.forward(rho);
  parallel_for(std::size_t(g.plane_size()), [&](std::size_t m) {
    const int i = int(m) / g.ny, j = int(m) % g.ny;
    Complex* col = rh.data() + m * nz;
    col[0] = 0.0;
    col[nz - 1] = 0.0;
    factors.at(kappa_sq(tr, i, j))->solve_in_place(col);
  });
  return ScalarField(g, tr.inverse(rh, nz));
}

}  // namespace mhdlag
