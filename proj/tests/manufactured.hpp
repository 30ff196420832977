#pragma once

// Manufactured Stokes flow shared by the solver tests and the acceptance run.

#include "mhdlag/linsolve.hpp"

#include <cmath>
#include <numbers>

namespace mhdlag::testing {

using std::numbers::pi;

// Manufactured flow with free-slip bottom at z = -1; s scales it in time.
struct Manufactured {
  double nu;
  double (*s)(double);
  double (*ds)(double);
  double a = pi;  // vertical wavenumber

  double C(double z) const { return std::cos(a * (z + 1)); }
  double S(double z) const { return std::sin(a * (z + 1)); }
  Eigen::Vector3d shape(double x, double y, double z) const {
    return {std::cos(pi * x) * C(z), std::sin(pi * y) * C(z), std::sin(pi * x) * S(z)};
  }
  Eigen::Vector3d v(double x, double y, double z, double t) const { return s(t) * shape(x, y, z); }
  double q(double x, double, double z, double t) const { return s(t) * std::cos(pi * x) * C(z); }
  double div(double x, double y, double z, double t) const {
    return s(t) * (-pi * std::sin(pi * x) + pi * std::cos(pi * y) + a * std::sin(pi * x)) * C(z);
  }
  Eigen::Vector3d f(double x, double y, double z, double t) const {
    const Eigen::Vector3d gq(-pi * std::sin(pi * x) * C(z), 0.0, -a * std::cos(pi * x) * S(z));
    return ds(t) * shape(x, y, z) + s(t) * (nu * (pi * pi + a * a) * shape(x, y, z) + gq);
  }
  double b(double x, double y, double t) const {
    return -q(x, y, 0.0, t) + 2 * nu * s(t) * a * std::sin(pi * x) * C(0.0);
  }
  Eigen::Vector2d d(double x, double y, double t) const {
    return nu * s(t) * S(0.0) * Eigen::Vector2d((pi - a) * std::cos(pi * x), -a * std::sin(pi * y));
  }

  StokesData data(const Grid& g) const {
    StokesData dat;
    for (int n = 0; n < g.nt; ++n) {
      const double t = g.t(n);
      VectorField fv(g);
      for (int c = 0; c < 3; ++c)
        fv[c] = ScalarField::sample(g, [&](double x, double y, double z) { return f(x, y, z, t)[c]; });
      dat.f.push_back(t, fv);
      dat.rho.push_back(t, ScalarField::sample(g, [&](double x, double y, double z) { return div(x, y, z, t); }));
      dat.b.push_back(t, SurfaceField::sample(g, [&](double x, double y) { return b(x, y, t); }));
      dat.d.push_back({SurfaceField::sample(g, [&](double x, double y) { return d(x, y, t)[0]; }),
                       SurfaceField::sample(g, [&](double x, double y) { return d(x, y, t)[1]; }), SurfaceField(g)});
    }
    dat.u0 = exact(g, 0.0);
    dat.n0 = {SurfaceField(g), SurfaceField(g), SurfaceField(g, 1.0)};
    return dat;
  }

  VectorField exact(const Grid& g, double t) const {
    VectorField out(g);
    for (int c = 0; c < 3; ++c)
      out[c] = ScalarField::sample(g, [&](double x, double y, double z) { return v(x, y, z, t)[c]; });
    return out;
  }
};

inline double one(double) { return 1.0; }
inline double zero(double) { return 0.0; }
inline double cos_t(double t) { return std::cos(t); }
inline double msin_t(double t) { return -std::sin(t); }

inline double mms_error(const Manufactured& m, const Grid& g) {
  const StokesSolution sol = solve_stokes(m.data(g), m.nu);
  return l2_norm(sol.v.u.back() - m.exact(g, g.t(g.nt - 1)));
}

}  // namespace mhdlag::testing
