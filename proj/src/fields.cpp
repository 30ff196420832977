#include "mhdlag/fields.hpp"

#include "mhdlag/spectral.hpp"

#include <cmath>
#include <sstream>

namespace mhdlag {

void Grid::validate() const {
  auto fail = [](const std::string& msg) { throw FieldError("invalid grid: " + msg); };
  if (nx < 4 || nx % 2 != 0) fail("nx must be even and >= 4");
  if (ny < 4 || ny % 2 != 0) fail("ny must be even and >= 4");
  if (nz < 4) fail("nz must be >= 4");
  if (!(depth > 0.0) || !std::isfinite(depth)) fail("depth must be positive");
  if (!(lx > 0.0) || !std::isfinite(lx)) fail("lx must be positive");
  if (!(ly > 0.0) || !std::isfinite(ly)) fail("ly must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt must be positive");
  if (nt < 2) fail("nt must be >= 2");
  for (double h : {hx(), hy(), hz()})
    if (!(h > 0.0) || !std::isfinite(h)) fail("grid spacing must be positive and finite");
}

void require_same_space(const Grid& a, const Grid& b, const char* where) {
  if (!a.same_space(b)) throw FieldError(std::string(where) + ": fields live on different grids");
}

namespace vertical {

void apply_first_derivative(const double* in, double* out, int nz, double h) {
  for (int k = 0; k < nz; ++k) {
    double acc = 0.0;
    first_derivative_row(k, nz, h, [&](int c, double w) { acc += w * in[c]; });
    out[k] = acc;
  }
}

void apply_second_derivative(const double* in, double* out, int nz, double h) {
  for (int k = 0; k < nz; ++k) {
    double acc = 0.0;
    second_derivative_row(k, nz, h, [&](int c, double w) { acc += w * in[c]; });
    out[k] = acc;
  }
}

}  // namespace vertical

namespace {

ScalarField horizontal_derivative(const HorizontalTransform& tr, const SpectralArray& coeffs,
                                  const Grid& g, int axis) {
  SpectralArray d(coeffs.size());
  const Complex I(0.0, 1.0);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const Complex factor = I * (axis == 0 ? tr.kx_eff(i) : tr.ky_eff(j));
      for (int k = 0; k < g.nz; ++k) d[g.index(i, j, k)] = factor * coeffs[g.index(i, j, k)];
    }
  return ScalarField(g, tr.inverse(d, g.nz));
}

ScalarField vertical_derivative(const ScalarField& f) {
  const Grid& g = f.grid();
  ScalarField out(g);
  for (Eigen::Index c = 0; c < g.plane_size(); ++c)
    vertical::apply_first_derivative(f.values().data() + c * g.nz, out.values().data() + c * g.nz,
                                     g.nz, g.hz());
  return out;
}

}  // namespace

ScalarField partial(const ScalarField& f, int axis) {
  if (axis == 2) return vertical_derivative(f);
  if (axis != 0 && axis != 1) throw FieldError("partial: axis must be 0, 1 or 2");
  HorizontalTransform tr(f.grid());
  return horizontal_derivative(tr, tr.forward(f), f.grid(), axis);
}

VectorField gradient(const ScalarField& f) {
  HorizontalTransform tr(f.grid());
  const SpectralArray coeffs = tr.forward(f);
  return VectorField(horizontal_derivative(tr, coeffs, f.grid(), 0),
                     horizontal_derivative(tr, coeffs, f.grid(), 1), vertical_derivative(f));
}

ScalarField divergence(const VectorField& v) {
  ScalarField out = partial(v[0], 0);
  out.values() += partial(v[1], 1).values();
  out.values() += partial(v[2], 2).values();
  return out;
}

ScalarField laplacian(const ScalarField& f) { return divergence(gradient(f)); }

ScalarField laplacian_compact(const ScalarField& f) {
  const Grid& g = f.grid();
  HorizontalTransform tr(g);
  SpectralArray coeffs = tr.forward(f);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const double k2 = tr.kx_eff(i) * tr.kx_eff(i) + tr.ky_eff(j) * tr.ky_eff(j);
      for (int k = 0; k < g.nz; ++k) coeffs[g.index(i, j, k)] *= -k2;
    }
  ScalarField out(g, tr.inverse(coeffs, g.nz));
  std::vector<double> col(g.nz);
  for (Eigen::Index c = 0; c < g.plane_size(); ++c) {
    vertical::apply_second_derivative(f.values().data() + c * g.nz, col.data(), g.nz, g.hz());
    for (int k = 0; k < g.nz; ++k) out.values()[c * g.nz + k] += col[k];
  }
  return out;
}

VectorField laplacian_compact(const VectorField& v) {
  return VectorField(laplacian_compact(v[0]), laplacian_compact(v[1]), laplacian_compact(v[2]));
}

TensorField velocity_gradient(const VectorField& v) {
  TensorField out(v.grid());
  for (int i = 0; i < 3; ++i) {
    VectorField gi = gradient(v[i]);
    for (int j = 0; j < 3; ++j) out(i, j) = std::move(gi[j]);
  }
  return out;
}

VectorField advective_derivative(const VectorField& a, const VectorField& b) {
  VectorField out(a.grid());
  for (int i = 0; i < 3; ++i) {
    const VectorField gb = gradient(b[i]);
    auto& o = out[i].values();
    o = a[0].values() * gb[0].values();
    o += a[1].values() * gb[1].values();
    o += a[2].values() * gb[2].values();
  }
  return out;
}

SurfaceField trace_top(const ScalarField& f) {
  const Grid& g = f.grid();
  SurfaceField s(g);
  for (Eigen::Index c = 0; c < g.plane_size(); ++c) s.values()[c] = f.values()[c * g.nz + g.nz - 1];
  return s;
}

SurfaceVectorField trace_top(const VectorField& v) {
  return {trace_top(v[0]), trace_top(v[1]), trace_top(v[2])};
}

SurfaceField surface_partial(const SurfaceField& s, int axis) {
  if (axis != 0 && axis != 1) throw FieldError("surface_partial: axis must be 0 or 1");
  const Grid& g = s.grid();
  HorizontalTransform tr(g);
  SpectralArray coeffs = tr.forward(s);
  const Complex I(0.0, 1.0);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) coeffs[g.column(i, j)] *= I * (axis == 0 ? tr.kx_eff(i) : tr.ky_eff(j));
  return SurfaceField(g, tr.inverse(coeffs, 1));
}

double inner(const ScalarField& a, const ScalarField& b) {
  require_same_space(a.grid(), b.grid(), "inner");
  const Grid& g = a.grid();
  double total = 0.0;
  for (Eigen::Index c = 0; c < g.plane_size(); ++c) {
    double col = 0.0;
    for (int k = 0; k < g.nz; ++k) col += g.z_weight(k) * a.values()[c * g.nz + k] * b.values()[c * g.nz + k];
    total += col;
  }
  return total * g.hx() * g.hy();
}

double l2_norm(const ScalarField& f) { return std::sqrt(inner(f, f)); }

double l2_norm(const VectorField& v) {
  return std::sqrt(inner(v[0], v[0]) + inner(v[1], v[1]) + inner(v[2], v[2]));
}

double surface_inner(const SurfaceField& a, const SurfaceField& b) {
  return (a.values() * b.values()).sum() * a.grid().hx() * a.grid().hy();
}

double l2_norm(const SurfaceField& s) { return std::sqrt(surface_inner(s, s)); }

double max_abs(const ScalarField& f) { return f.values().abs().maxCoeff(); }

double max_abs(const VectorField& v) {
  return std::max({max_abs(v[0]), max_abs(v[1]), max_abs(v[2])});
}

double max_abs(const SurfaceField& s) { return s.values().abs().maxCoeff(); }

void require_finite(const ScalarField& f, const char* where) {
  if (!f.all_finite()) throw FieldError(std::string(where) + ": non-finite field values");
}

void require_finite(const VectorField& v, const char* where) {
  if (!v.all_finite()) throw FieldError(std::string(where) + ": non-finite field values");
}

}  // namespace mhdlag
