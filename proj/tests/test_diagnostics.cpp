#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mhdlag/diagnostics.hpp"

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

}  // namespace

TEST_CASE("compatibility: zero data passes") {
  const Grid g = grid();
  const CompatReport r = check_compatibility(VectorField(g), VectorField(g), reference_normal(g), 1e-8);
  CHECK(r.ok());
  for (const auto& item : r.items) CHECK(item.residual == 0.0);
  CHECK(r.failures().empty());
}

TEST_CASE("compatibility: shear with surface stress") {
  const Grid g = grid();
  const double alpha = 0.3, nu = 2.0;
  // u1 = alpha sin(y) z has d_z u1 = alpha sin(y) on the top face, so the
  // tangential stress is 2 nu * alpha / 2 * max|sin y| = nu alpha.
  const VectorField u0(ScalarField::sample(g, [&](double, double y, double z) { return alpha * std::sin(y) * z; }),
                       ScalarField(g), ScalarField(g));
  const CompatReport r = check_compatibility(u0, VectorField(g), reference_normal(g), 1e-8, nu);
  CHECK_FALSE(r.ok());
  CHECK(r.failures() == "tangential_stress");
  CHECK(r.residual("tangential_stress") == doctest::Approx(nu * alpha).epsilon(1e-12));
  CHECK(r.residual("div_u0") < 1e-14);
}

TEST_CASE("compatibility: magnetic field on the surface is flagged") {
  const Grid g = grid();
  const VectorField H0(ScalarField::sample(g, [](double, double y, double) { return std::cos(y); }), ScalarField(g),
                       ScalarField(g));
  const CompatReport r = check_compatibility(VectorField(g), H0, reference_normal(g), 1e-8);
  CHECK(r.failures() == "H0_top_trace");
  CHECK(r.residual("H0_top_trace") == doctest::Approx(1.0));
}

TEST_CASE("divergence propagation: pure diffusion decays at the discrete heat rate") {
  Grid g = grid(8, 17);
  const double dt = 1e-2, lambda = 0.5, eps = 1e-2;
  g.dt = dt;
  g.nt = 21;
  const VectorField H0(
      ScalarField::sample(g, [&](double x, double, double z) { return eps * std::sin(x) * std::sin(pi * z); }),
      ScalarField(g), ScalarField(g));
  VectorSeries src, v;
  for (int n = 0; n < g.nt; ++n) {
    src.push_back(g.t(n), VectorField(g));
    v.push_back(g.t(n), VectorField(g));
  }
  const HeatSolution heat = solve_heat_dirichlet(src, H0, lambda);
  const PropagationReport r = divergence_propagation(heat.B, v, lambda);
  const double h = g.hz();
  const double mu = 1.0 + 4.0 / (h * h) * std::pow(std::sin(pi * h / 2), 2);
  for (int n = 0; n < g.nt; ++n)
    CHECK(r.div_inf[n] / r.div_inf[0] == doctest::Approx(std::pow(1 + lambda * mu * dt, -n)).epsilon(1e-12));
  CHECK(r.ok());
  CHECK(r.max_mismatch < 1e-14);
  CHECK(r.worst_level == 0);
}

TEST_CASE("divergence propagation: coupled run keeps a solenoidal field solenoidal") {
  const Grid g = grid();
  const IterationConfig c = config();
  const double A = 0.02;
  const VectorField u0(
      ScalarField::sample(g, [&](double, double y, double z) { return A * std::sin(y) * (1 - z * z); }),
      ScalarField::sample(g, [&](double x, double, double z) { return A * std::cos(x) * (1 - z * z); }),
      ScalarField(g));
  const VectorField H0(
      ScalarField::sample(g, [&](double, double y, double z) { return A * std::cos(y) * std::sin(pi * z); }),
      ScalarField::sample(g, [&](double x, double, double z) { return A * std::sin(x) * std::sin(pi * z); }),
      ScalarField(g));
  const auto run = picard_full_nonlinear(u0, H0, SurfaceField(g), c);
  const PropagationReport r = divergence_propagation(run.state.B, run.state.v, c.lambda, c.contraction_tol);
  CHECK(r.initial == 0.0);
  CHECK(r.ok());
  CHECK(r.max_value <= r.tol_div);
  // The iteration stops relative to the first update, so the mismatch follows
  // the field amplitude.
  double bmax = 0.0;
  for (const auto& b : run.state.B.u) bmax = std::max(bmax, max_abs(b));
  CHECK(r.max_mismatch < 1e-5 * bmax + 10 * c.contraction_tol);

  const EnergyReport e = energy_monitor(run.state, c);
  CHECK_FALSE(e.asserted);  // gravity on
  IterationConfig off = c;
  off.g_grav = 0.0;
  const auto quiet = picard_full_nonlinear(u0, H0, SurfaceField(g), off);
  const EnergyReport eq = energy_monitor(quiet.state, off);
  CHECK(eq.asserted);
  CHECK(eq.nonincreasing);
  for (std::size_t n = 1; n < eq.energy.size(); ++n) CHECK(eq.energy[n] < eq.energy[n - 1]);
}

TEST_CASE("energy of the zero state") {
  const IterationConfig c = config();
  const EnergyReport e = energy_monitor(MHDState::zero(grid(), c), c);
  CHECK(e.energy.size() == 11);
  for (double x : e.energy) CHECK(x == 0.0);
  CHECK(e.nonincreasing);
}

TEST_CASE("continuation: zero data continues trivially") {
  const Grid g = grid();
  const ContinuationReport r =
      continuation_experiment(VectorField(g), VectorField(g), SurfaceField(g), config(), 1.0);
  CHECK(r.E0 == 0.0);
  CHECK(r.small_enough);
  CHECK(r.restart_converged);
  CHECK(r.ok());
  CHECK(r.E.size() == 21);
}

TEST_CASE("continuation: bound above eps0 is reported, not asserted") {
  const Grid g = grid();
  const SurfaceField h0 = SurfaceField::sample(g, [](double x, double) { return 0.01 * std::cos(x); });
  const ContinuationReport r = continuation_experiment(VectorField(g), VectorField(g), h0, config(), 1e-6);
  CHECK_FALSE(r.small_enough);
  CHECK_FALSE(r.restart_attempted);
  CHECK_FALSE(r.ok());
  CHECK(r.failure.find("eps0") != std::string::npos);
  CHECK(r.bound_holds);
}

TEST_CASE("log-log slope of an exact power law") {
  const std::vector<double> x{1, 2, 4, 8};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 0.625));
  CHECK(loglog_slope(x, y) == doctest::Approx(0.625).epsilon(1e-12));
}

TEST_CASE("random fields are seeded, unit and grid independent") {
  const Grid g = grid(12, 13);
  Grid f = g;
  f.nx = f.ny = 24;
  f.nz = 25;
  const ScalarField a = random_band_limited(g, g, 42), b = random_band_limited(g, g, 42);
  CHECK((a.values() == b.values()).all());
  CHECK(l2_norm(a) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(max_abs(a - random_band_limited(g, g, 43)) > 0.1);
  // Same coefficients on the refined grid: coinciding nodes agree up to the
  // normalization factor.
  const ScalarField c = random_band_limited(f, g, 42);
  const double scale = a(1, 1, 2) / c(2, 2, 4);
  CHECK(a(3, 5, 6) == doctest::Approx(scale * c(6, 10, 12)).epsilon(1e-10));
  CHECK(scale == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("probes: empty and reproducible") {
  ProbeConfig pc;
  pc.grid = grid();
  pc.trials = 0;
  const ProbeReport empty = inequality_probes(pc);
  CHECK(empty.constants.size() == 3);
  CHECK(empty.slopes.size() == 3);
  for (const auto& s : empty.slopes) CHECK(s.slopes.empty());

  pc.trials = 1;
  const std::string a = inequality_probes(pc).to_json();
  const std::string b = inequality_probes(pc).to_json();
  CHECK(a == b);
  pc.seed = 2;
  CHECK(inequality_probes(pc).to_json() != a);
}

TEST_CASE("probes: exponents in the small-T regime") {
  ProbeConfig pc;
  pc.grid = grid();
  pc.trials = 2;
  const ProbeReport r = inequality_probes(pc);
  for (const auto& s : r.slopes) {
    INFO(s.name << " slope " << s.slope << " expected " << s.expected);
    CHECK(s.ok);
  }
  for (const auto& c : r.constants) {
    INFO(c.name << " spread " << c.spread);
    CHECK(c.ok);
  }
}
