#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mhdlag/lagrangian.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

using namespace mhdlag;
using std::numbers::pi;

namespace {

Grid grid(int nz = 17) {
  Grid g;
  g.nx = 8;
  g.ny = 8;
  g.nz = nz;
  g.lx = 2.0;
  g.ly = 2.0;
  g.depth = 1.0;
  g.dt = 1e-2;
  return g;
}

ScalarField smooth(const Grid& g, double phase) {
  return ScalarField::sample(g, [&](double x, double y, double z) {
    return std::sin(pi * x + phase) * std::cos(pi * y) * std::exp(0.5 * z);
  });
}

bool bit_equal(const ScalarField& a, const ScalarField& b) { return (a.values() == b.values()).all(); }

}  // namespace

TEST_CASE("zero velocity leaves the state unchanged") {
  const Grid g = grid();
  const auto s0 = DeformationState::initial(g);
  const auto s1 = accumulate_displacement(s0, VectorField(g), 0.3);
  CHECK(max_abs(s1.jac - ScalarField(g, 1.0)) == 0.0);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      CHECK(max_abs(s1.a(r, c)) == 0.0);
      CHECK(max_abs(s1.g_mat(r, c) - ScalarField(g, r == c ? 1.0 : 0.0)) == 0.0);
    }
  CHECK(s1.t == doctest::Approx(0.3));
}

TEST_CASE("vertical shear accumulates a single entry") {
  const Grid g = grid();
  const double alpha = 0.4;
  const auto vx = ScalarField::sample(g, [&](double, double, double z) { return alpha * z; });
  const VectorField v(vx, ScalarField(g), ScalarField(g));
  auto s = DeformationState::initial(g);
  const int steps = 10;
  for (int n = 0; n < steps; ++n) s = accumulate_displacement(s, v, g.dt, &v);
  const double t = steps * g.dt;
  // I + A = [[1,0,a t],[0,1,0],[0,0,1]], inverse transpose has -a t at (2,0).
  const Eigen::Index p = g.index(3, 4, 5);
  Eigen::Matrix3d expect = Eigen::Matrix3d::Identity();
  expect(2, 0) = -alpha * t;
  CHECK((s.g_mat.at(p) - expect).norm() < 1e-12);
  CHECK(s.a.at(p)(0, 2) == doctest::Approx(alpha * t).epsilon(1e-12));
  CHECK(std::abs(s.jac.values()[p] - 1.0) < 1e-14);
}

TEST_CASE("planar strain determinant") {
  // v = (beta x, -beta y, 0) has constant Dv, so A = t Dv exactly.
  const Grid g = grid();
  const double beta = 0.5, t = 0.05;
  TensorField a(g);
  a(0, 0).values().setConstant(beta * t);
  a(1, 1).values().setConstant(-beta * t);
  CHECK(max_abs(jacobian_det(a) - ScalarField(g, (1 + beta * t) * (1 - beta * t))) < 1e-15);
}

TEST_CASE("cotangent matrix oracles") {
  const Grid g = grid();
  TensorField a(g);
  CHECK(max_abs(cotangent_matrix(a)(0, 0) - ScalarField(g, 1.0)) == 0.0);
  const double eps = 0.2;
  a(0, 0).values().setConstant(eps);
  const auto gm = cotangent_matrix(a);
  CHECK(gm(0, 0).values()[0] == doctest::Approx(1 / (1 + eps)).epsilon(1e-15));
  CHECK(gm(1, 1).values()[0] == 1.0);
  CHECK(gm(2, 2).values()[0] == 1.0);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.03, 0.03);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      for (auto& x : a(r, c).values()) x = u(rng);
  const auto gr = cotangent_matrix(a);
  double worst = 0.0;
  for (Eigen::Index p = 0; p < g.size(); ++p) {
    const Eigen::Matrix3d m = Eigen::Matrix3d::Identity() + a.at(p);
    worst = std::max(worst, (gr.at(p).transpose() * m - Eigen::Matrix3d::Identity()).norm());
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("degenerate map reports location and time") {
  const Grid g = grid();
  TensorField a(g);
  a(2, 2)(1, 2, 3) = -0.95;
  try {
    cotangent_matrix(a, 0.1, 0.25);
    FAIL("expected DegenerateMapError");
  } catch (const DegenerateMapError& e) {
    CHECK(e.i == 1);
    CHECK(e.j == 2);
    CHECK(e.k == 3);
    CHECK(e.time == 0.25);
    CHECK(e.value == doctest::Approx(0.05));
  }
}

TEST_CASE("jacobian of diagonal displacement") {
  const Grid g = grid();
  TensorField a(g);
  a(0, 0).values().setConstant(0.1);
  a(1, 1).values().setConstant(-0.2);
  a(2, 2).values().setConstant(0.05);
  CHECK(max_abs(jacobian_det(a) - ScalarField(g, 1.1 * 0.8 * 1.05)) < 1e-15);
}

TEST_CASE("transformed operators reduce to flat ones bit for bit") {
  const Grid g = grid();
  const auto id = TensorField::identity(g);
  const auto f = smooth(g, 0.3);
  const VectorField v(smooth(g, 0.1), smooth(g, 0.7), smooth(g, 1.3));
  const auto tg = transformed_gradient(id, f);
  const auto fg = gradient(f);
  for (int i = 0; i < 3; ++i) CHECK(bit_equal(tg[i], fg[i]));
  CHECK(bit_equal(transformed_divergence(id, v), divergence(v)));
  CHECK(bit_equal(transformed_laplacian(id, f), laplacian(f)));
  const auto dv = transformed_velocity_gradient(id, v);
  const auto fv = velocity_gradient(v);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(bit_equal(dv(i, j), fv(i, j)));
}

TEST_CASE("transformed operators vanish on constants") {
  const Grid g = grid();
  TensorField a(g);
  a(0, 1).values().setConstant(0.1);
  a(2, 0).values().setConstant(-0.05);
  const auto gm = cotangent_matrix(a);
  CHECK(max_abs(transformed_gradient(gm, ScalarField(g, 2.0))) < 1e-13);
  CHECK(max_abs(transformed_divergence(gm, VectorField(g))) == 0.0);
  CHECK(max_abs(transformed_laplacian(gm, ScalarField(g, -1.0))) < 1e-12);
}

TEST_CASE("diagonal G scales spectral derivatives") {
  const Grid g = grid();
  TensorField gm(g);
  gm(0, 0).values().setConstant(2.0);
  gm(1, 1).values().setConstant(0.5);
  gm(2, 2).values().setConstant(3.0);
  const double k = pi;
  const auto f = ScalarField::sample(g, [&](double x, double y, double) { return std::sin(k * x) + std::cos(k * y); });
  const auto d = transformed_gradient(gm, f);
  const auto ex = ScalarField::sample(g, [&](double x, double, double) { return 2.0 * k * std::cos(k * x); });
  const auto ey = ScalarField::sample(g, [&](double, double y, double) { return -0.5 * k * std::sin(k * y); });
  CHECK(max_abs(d[0] - ex) < 1e-12);
  CHECK(max_abs(d[1] - ey) < 1e-12);
  CHECK(max_abs(d[2]) < 1e-12);

  // Divergence of (sin kx, 0, 0) scales by G_00.
  const VectorField v(ScalarField::sample(g, [&](double x, double, double) { return std::sin(k * x); }),
                      ScalarField(g), ScalarField(g));
  CHECK(max_abs(transformed_divergence(gm, v) - ex) < 1e-12);

  // Laplacian under x -> x / 2 scaling: G = diag(2, 1, 1) gives 4 f_xx.
  TensorField sx = TensorField::identity(g);
  sx(0, 0).values().setConstant(2.0);
  const auto s = ScalarField::sample(g, [&](double x, double, double) { return std::sin(k * x); });
  CHECK(max_abs(transformed_laplacian(sx, s) - (-4.0 * k * k) * s) < 1e-11);
}

TEST_CASE("deformation tensor") {
  const Grid g = grid();
  const auto id = TensorField::identity(g);
  const double alpha = 0.7;
  const VectorField shear(ScalarField::sample(g, [&](double, double, double z) { return alpha * z; }),
                          ScalarField(g), ScalarField(g));
  const auto d = deformation_tensor(id, shear);
  CHECK(d(0, 2).values().maxCoeff() == doctest::Approx(alpha / 2).epsilon(1e-12));
  CHECK(d(2, 0).values().minCoeff() == doctest::Approx(alpha / 2).epsilon(1e-12));
  CHECK(max_abs(d(0, 0)) < 1e-12);

  // Rigid rotation in the x-z plane along x = 0: d_z v1 = c, d_x v3 = -c there.
  const VectorField rot(ScalarField::sample(g, [&](double, double, double z) { return alpha * z; }), ScalarField(g),
                        ScalarField::sample(g, [&](double x, double, double) { return -alpha * std::sin(pi * x) / pi; }));
  const auto dr = deformation_tensor(id, rot);
  for (int j = 0; j < g.ny; ++j)
    for (int k = 0; k < g.nz; ++k) CHECK(std::abs(dr(0, 2)(0, j, k)) < 1e-12);

  const VectorField v(smooth(g, 0.2), smooth(g, 0.9), smooth(g, 1.7));
  TensorField a(g);
  a(0, 1).values().setConstant(0.1);
  const auto dv = deformation_tensor(cotangent_matrix(a), v);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(bit_equal(dv(i, j), dv(j, i)));
}

TEST_CASE("transformed normal") {
  const Grid g = grid();
  const auto n0 = reference_normal(g);
  const auto n = transformed_normal(TensorField::identity(g), n0);
  for (int r = 0; r < 3; ++r) CHECK(max_abs(n[r] - n0[r]) == 0.0);

  // Surface mapped by X = xi + (0, 0, eta(x)) near the top: with A(2,0) = eta'
  // the tangent is (1, 0, eta') and the normal must be orthogonal to it.
  TensorField a(g);
  const double slope = 0.3;
  a(2, 0).values().setConstant(slope);
  const auto gm = cotangent_matrix(a);
  const auto nm = transformed_normal(gm, n0);
  const Eigen::Vector3d tangent_fd(1.0, 0.0, slope);
  for (Eigen::Index c = 0; c < g.plane_size(); ++c) {
    const Eigen::Vector3d nv(nm[0].values()[c], nm[1].values()[c], nm[2].values()[c]);
    CHECK(std::abs(nv.norm() - 1.0) < 1e-12);
    CHECK(std::abs(nv.dot(tangent_fd)) < 1e-12);
  }
}

TEST_CASE("steady incompressible flow: J - 1 is second order in t") {
  // A = t Dv for a steady field. With tr Dv = 0 and only a horizontal 2x2
  // block, det(I + t Dv) - 1 = t^2 det(Dv_h), and max |det Dv_h| = k^2.
  Grid g = grid(33);
  const double k = pi, dt = 0.01, t = 0.1;
  g.dt = dt;
  const VectorField v(
      ScalarField::sample(g, [&](double x, double y, double) { return std::sin(k * x) * std::cos(k * y); }),
      ScalarField::sample(g, [&](double x, double y, double) { return -std::cos(k * x) * std::sin(k * y); }),
      ScalarField(g));
  auto s = DeformationState::initial(g);
  for (int n = 0; n < 10; ++n) s = accumulate_displacement(s, v, dt, &v);
  const double dev = max_abs(s.jac - ScalarField(g, 1.0));
  CHECK(dev == doctest::Approx(t * t * k * k).epsilon(1e-6));
}
