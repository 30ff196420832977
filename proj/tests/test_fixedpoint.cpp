#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mhdlag/fixedpoint.hpp"

#include <cmath>
#include <numbers>

using namespace mhdlag;
using std::numbers::pi;

namespace {

Grid grid(int n = 8, int nz = 9) {
  Grid g;
  g.nx = n;
  g.ny = n;
  g.nz = nz;
  return g;
}

IterationConfig config(double T = 0.02, double dt = 2e-3) {
  IterationConfig c;
  c.T = T;
  c.dt = dt;
  return c;
}

// Divergence-free, stress-compatible velocity and a divergence-free field
// vanishing on both faces.
VectorField shear_velocity(const Grid& g, double A) {
  return {ScalarField::sample(g, [&](double, double y, double z) { return A * std::sin(y) * (1 - z * z); }),
          ScalarField::sample(g, [&](double x, double, double z) { return A * std::cos(x) * (1 - z * z); }),
          ScalarField(g)};
}

VectorField wall_field(const Grid& g, double A) {
  return {ScalarField::sample(g, [&](double, double y, double z) { return A * std::cos(y) * std::sin(pi * z); }),
          ScalarField::sample(g, [&](double x, double, double z) { return A * std::sin(x) * std::sin(pi * z); }),
          ScalarField(g)};
}

double series_max(const VectorSeries& s) {
  double m = 0.0;
  for (const auto& u : s.u) m = std::max(m, max_abs(u));
  return m;
}

}  // namespace

TEST_CASE("smallness threshold is the positive root") {
  const double d0 = smallness_threshold();
  CHECK(std::abs(6 * d0 * d0 + 6 * d0 - 1) < 1e-14);
  CHECK(d0 == doctest::Approx(0.1455).epsilon(1e-3));
}

TEST_CASE("config validation names the field") {
  IterationConfig c = config();
  CHECK_NOTHROW(c.validate());
  CHECK(c.levels() == 11);
  c.l = 1.0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("l:"), ConfigError);
  c = config();
  c.delta = 0.2;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("delta"), ConfigError);
  c = config(0.021, 2e-3);
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("dt"), ConfigError);
}

TEST_CASE("smallness gate: zero field and homogeneity") {
  const IterationConfig c = config();
  const Grid g = grid();
  MHDState z = MHDState::zero(g, c);
  auto r = check_smallness(z.v, c);
  CHECK(r.ok);
  CHECK(r.margin == c.delta);

  VectorSeries v;
  const VectorField u = shear_velocity(g, 1.0);
  for (std::size_t n = 0; n < z.v.size(); ++n) v.push_back(z.v.t[n], u);
  const double unit = check_smallness(v, c).value;
  const double crossing = c.delta / unit;
  for (auto& x : v.u) x *= 0.99 * crossing;
  CHECK(check_smallness(v, c).ok);
  for (auto& x : v.u) x *= 1.02 / 0.99;
  CHECK_FALSE(check_smallness(v, c).ok);
}

TEST_CASE("constant coefficient: zero data gives the zero state") {
  const IterationConfig c = config();
  auto res = picard_constant_coefficient(ConstantCoefficientData::zero(grid(), c), c);
  CHECK(res.trace.converged);
  REQUIRE(res.trace.Y.size() == 1);
  CHECK(res.trace.Y[0] == 0.0);
  CHECK(series_max(res.state.v) == 0.0);
  CHECK(series_max(res.state.B) == 0.0);
}

TEST_CASE("constant coefficient: no magnetic data keeps B at zero") {
  const IterationConfig c = config();
  const Grid g = grid();
  auto data = ConstantCoefficientData::zero(g, c);
  data.u0 = shear_velocity(g, 0.1);
  for (auto& b : data.b.u) b.values().setConstant(0.3);
  auto res = picard_constant_coefficient(data, c);
  CHECK(res.trace.converged);
  CHECK(res.trace.Y.size() == 2);
  CHECK(res.trace.Y[1] == 0.0);
  CHECK(series_max(res.state.B) == 0.0);
  CHECK(res.warnings.empty());
}

TEST_CASE("constant coefficient: contraction improves when T halves") {
  const Grid g = grid();
  double chi[2];
  for (int r = 0; r < 2; ++r) {
    const IterationConfig c = config(r == 0 ? 0.04 : 0.02);
    auto data = ConstantCoefficientData::zero(g, c);
    data.u0 = shear_velocity(g, 0.05);
    data.H0 = wall_field(g, 0.05);
    auto res = picard_constant_coefficient(data, c);
    REQUIRE(res.trace.converged);
    for (std::size_t i = 1; i < res.trace.ratios.size(); ++i) CHECK(res.trace.ratios[i] < 1.0);
    chi[r] = res.trace.chi();
  }
  CHECK(chi[1] < chi[0]);
}

TEST_CASE("corrections vanish with the identity map") {
  const IterationConfig c = config();
  const Grid g = grid();
  MHDState s = MHDState::zero(g, c);
  const MHDState base = s;
  const VectorField B = wall_field(g, 0.2);
  for (auto& x : s.B.u) x = B;
  for (auto& q : s.q.u) q = ScalarField::sample(g, [](double x, double, double z) { return std::cos(x) * z; });
  const CorrectionTerms t = build_correction_terms(s, base, c);
  const VectorField lorentz = advective_derivative(B, B);
  for (std::size_t n = 0; n < t.f.size(); ++n) {
    CHECK(max_abs(t.f.u[n] - lorentz) < 1e-14);
    CHECK(max_abs(t.rho.u[n]) == 0.0);
    CHECK(max_abs(t.R.u[n]) == 0.0);
    CHECK(max_abs(t.b.u[n]) == 0.0);
    for (int r = 0; r < 3; ++r) CHECK(max_abs(t.d[n][r]) == 0.0);
  }
}

TEST_CASE("divergence correction is the (I - G) : grad v contraction") {
  const IterationConfig c = config();
  const Grid g = grid();
  MHDState s = MHDState::zero(g, c);
  const MHDState base = s;
  const VectorField v = shear_velocity(g, 0.5) + VectorField(ScalarField(g), ScalarField(g),
                                                             ScalarField::sample(g, [](double x, double, double z) {
                                                               return 0.3 * std::sin(x) * z * z;
                                                             }));
  for (auto& x : s.v.u) x = v;
  s.deformation = deformation_history(s.v.u, c.dt, c.jac_floor);
  const CorrectionTerms t = build_correction_terms(s, base, c);
  const TensorField grad = velocity_gradient(v);
  const std::size_t n = t.rho.size() - 1;
  const TensorField& G = s.deformation[n].g_mat;
  double worst = 0.0, scale = 0.0;
  for (Eigen::Index p = 0; p < g.size(); ++p) {
    const Eigen::Matrix3d M = Eigen::Matrix3d::Identity() - G.at(p);
    const Eigen::Matrix3d D = grad.at(p);
    double expect = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) expect += M(i, j) * D(i, j);
    worst = std::max(worst, std::abs(t.rho.u[n].values()[p] - expect));
    scale = std::max(scale, std::abs(expect));
  }
  CHECK(scale > 1e-4);
  CHECK(worst < 1e-13);
}

TEST_CASE("surface update") {
  const Grid g = grid(16);
  const double dt = 1e-2;
  const SurfaceField h = SurfaceField::sample(g, [](double x, double) { return 0.1 * std::sin(x); });
  CHECK(max_abs(update_surface(h, VectorField(g), dt) - h) == 0.0);

  VectorField lift(g);
  lift[2].values().setConstant(0.5);
  const SurfaceField flat(g);
  const SurfaceField up = update_surface(flat, lift, dt);
  CHECK(up.values().maxCoeff() == doctest::Approx(0.005).epsilon(1e-14));
  CHECK(up.values().minCoeff() == doctest::Approx(0.005).epsilon(1e-14));

  // Linear advection by a uniform horizontal flow, first order in dt.
  const double U = 1.0, T = 0.5;
  double err[2];
  for (int r = 0; r < 2; ++r) {
    const int steps = 25 << r;
    VectorField flow(g);
    flow[0].values().setConstant(U);
    SurfaceField s = h;
    for (int n = 0; n < steps; ++n) s = update_surface(s, flow, T / steps);
    const SurfaceField exact = SurfaceField::sample(g, [&](double x, double) { return 0.1 * std::sin(x - U * T); });
    err[r] = max_abs(s - exact);
  }
  CHECK(err[0] / err[1] == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("full scheme: zero data") {
  const IterationConfig c = config();
  const Grid g = grid();
  auto r = picard_full_nonlinear(VectorField(g), VectorField(g), SurfaceField(g), c);
  CHECK(r.trace.converged);
  CHECK(r.trace.Y.size() == 1);
  CHECK(series_max(r.state.v) == 0.0);
  CHECK(r.smallness.ok);
}

TEST_CASE("full scheme: no magnetic data is free-boundary Navier-Stokes") {
  const IterationConfig c = config();
  const Grid g = grid();
  const SurfaceField h0 = SurfaceField::sample(g, [](double x, double y) { return 0.01 * std::cos(x + y); });
  auto r = picard_full_nonlinear(shear_velocity(g, 0.05), VectorField(g), h0, c);
  CHECK(r.trace.converged);
  CHECK(series_max(r.state.B) == 0.0);
  const SystemResiduals res = system_residuals(r.state, c);
  CHECK(res.max() < 1e-7);
}

TEST_CASE("full scheme: small coupled data contracts and satisfies the system") {
  const IterationConfig c = config();
  const Grid g = grid();
  auto r = picard_full_nonlinear(shear_velocity(g, 0.02), wall_field(g, 0.02), SurfaceField(g), c);
  REQUIRE(r.trace.converged);
  CHECK(r.trace.Y.size() >= 3);
  for (std::size_t i = 1; i < r.trace.ratios.size(); ++i) CHECK(r.trace.ratios[i] < 1.0);
  const SystemResiduals res = system_residuals(r.state, c);
  CHECK(res.momentum < 1e-7);
  CHECK(res.induction < 1e-7);
  CHECK(res.continuity < 1e-7);
  CHECK(res.normal_stress < 1e-7);
  CHECK(res.tangential_stress < 1e-7);
  CHECK(res.magnetic_boundary == 0.0);
  for (const auto& d : r.state.deformation) {
    CHECK(d.jac.values().minCoeff() > 1 - 5 * c.dt);
    CHECK(d.jac.values().maxCoeff() < 1 + 5 * c.dt);
  }
}

TEST_CASE("full scheme: incompatible initial velocity is rejected") {
  const IterationConfig c = config();
  const Grid g = grid();
  const VectorField u0(ScalarField::sample(g, [](double, double y, double z) { return std::sin(y) * z; }),
                       ScalarField(g), ScalarField(g));
  CHECK_THROWS_WITH_AS(picard_full_nonlinear(u0, VectorField(g), SurfaceField(g), c),
                       doctest::Contains("tangential"), ConfigError);
}

TEST_CASE("non-contraction reports chi and suggests a shorter horizon") {
  IterationConfig c = config();
  c.max_iters = 1;
  const Grid g = grid();
  try {
    picard_full_nonlinear(shear_velocity(g, 0.05), wall_field(g, 0.05), SurfaceField(g), c);
    FAIL("expected NonContractionError");
  } catch (const NonContractionError& e) {
    CHECK(std::string(e.what()).find("T = 0.01") != std::string::npos);
    CHECK(e.iterate() == 1);
  }
}
