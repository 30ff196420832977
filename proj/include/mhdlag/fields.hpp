#pragma once

// Discrete fields on a horizontally periodic slab.
//
// The slab is [0, lx) x [0, ly) x [-depth, 0]. Horizontal directions carry
// nx x ny uniformly spaced periodic points; the vertical direction carries nz
// nodes including both faces, with the free surface S_F at the top node
// (z = 0, k = nz - 1) and an artificial wall at the bottom node (k = 0).
// Storage is row-major over (i, j, k): the vertical index varies fastest, so
// each vertical column is contiguous.

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mhdlag {

class FieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Grid {
  int nx = 16;
  int ny = 16;
  int nz = 17;
  double lx = 2.0 * std::numbers::pi;
  double ly = 2.0 * std::numbers::pi;
  double depth = 1.0;
  double dt = 1e-3;
  int nt = 2;

  double hx() const { return lx / nx; }
  double hy() const { return ly / ny; }
  double hz() const { return depth / (nz - 1); }
  double x(int i) const { return i * hx(); }
  double y(int j) const { return j * hy(); }
  double z(int k) const { return -depth + k * hz(); }
  double t(int n) const { return n * dt; }
  double final_time() const { return (nt - 1) * dt; }

  Eigen::Index size() const { return Eigen::Index(nx) * ny * nz; }
  Eigen::Index plane_size() const { return Eigen::Index(nx) * ny; }
  Eigen::Index index(int i, int j, int k) const {
    return (Eigen::Index(i) * ny + j) * nz + k;
  }
  Eigen::Index column(int i, int j) const { return Eigen::Index(i) * ny + j; }

  /// Throws FieldError naming the first violated constraint.
  void validate() const;

  /// True when the spatial discretization matches; time stepping is ignored.
  bool same_space(const Grid& other) const {
    return nx == other.nx && ny == other.ny && nz == other.nz && lx == other.lx &&
           ly == other.ly && depth == other.depth;
  }

  /// Node weight of the vertical trapezoid rule (half weight on the faces).
  double z_weight(int k) const { return (k == 0 || k == nz - 1) ? 0.5 * hz() : hz(); }
  double cell_weight(int k) const { return hx() * hy() * z_weight(k); }
};

void require_same_space(const Grid& a, const Grid& b, const char* where);

template <typename Scalar>
class ScalarFieldT {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  ScalarFieldT() = default;
  explicit ScalarFieldT(const Grid& grid, Scalar value = Scalar(0))
      : grid_(grid), values_(Array::Constant(grid.size(), value)) {}
  ScalarFieldT(const Grid& grid, Array values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw FieldError("scalar field size does not match grid");
  }

  template <typename Fn>
  static ScalarFieldT sample(const Grid& grid, Fn&& fn) {
    ScalarFieldT f(grid);
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.ny; ++j)
        for (int k = 0; k < grid.nz; ++k)
          f.values_[grid.index(i, j, k)] = fn(grid.x(i), grid.y(j), grid.z(k));
    return f;
  }

  const Grid& grid() const { return grid_; }
  const Array& values() const { return values_; }
  Array& values() { return values_; }
  Scalar operator()(int i, int j, int k) const { return values_[grid_.index(i, j, k)]; }
  Scalar& operator()(int i, int j, int k) { return values_[grid_.index(i, j, k)]; }
  bool all_finite() const { return values_.allFinite(); }

  ScalarFieldT& operator+=(const ScalarFieldT& o) {
    require_same_space(grid_, o.grid_, "operator+=");
    values_ += o.values_;
    return *this;
  }
  ScalarFieldT& operator-=(const ScalarFieldT& o) {
    require_same_space(grid_, o.grid_, "operator-=");
    values_ -= o.values_;
    return *this;
  }
  ScalarFieldT& operator*=(Scalar s) {
    values_ *= s;
    return *this;
  }

 private:
  Grid grid_;
  Array values_;
};

template <typename Scalar>
ScalarFieldT<Scalar> operator+(ScalarFieldT<Scalar> a, const ScalarFieldT<Scalar>& b) {
  return a += b;
}
template <typename Scalar>
ScalarFieldT<Scalar> operator-(ScalarFieldT<Scalar> a, const ScalarFieldT<Scalar>& b) {
  return a -= b;
}
template <typename Scalar>
ScalarFieldT<Scalar> operator*(Scalar s, ScalarFieldT<Scalar> a) {
  return a *= s;
}
template <typename Scalar>
ScalarFieldT<Scalar> operator*(const ScalarFieldT<Scalar>& a, const ScalarFieldT<Scalar>& b) {
  require_same_space(a.grid(), b.grid(), "pointwise product");
  return ScalarFieldT<Scalar>(a.grid(), a.values() * b.values());
}

template <typename Scalar>
class VectorFieldT {
 public:
  using Component = ScalarFieldT<Scalar>;

  VectorFieldT() = default;
  explicit VectorFieldT(const Grid& grid) : c_{Component(grid), Component(grid), Component(grid)} {}
  VectorFieldT(Component a, Component b, Component c) : c_{std::move(a), std::move(b), std::move(c)} {
    require_same_space(c_[0].grid(), c_[1].grid(), "VectorField");
    require_same_space(c_[0].grid(), c_[2].grid(), "VectorField");
  }

  const Grid& grid() const { return c_[0].grid(); }
  const Component& operator[](int i) const { return c_[i]; }
  Component& operator[](int i) { return c_[i]; }
  bool all_finite() const { return c_[0].all_finite() && c_[1].all_finite() && c_[2].all_finite(); }

  Eigen::Matrix<Scalar, 3, 1> at(Eigen::Index p) const {
    return {c_[0].values()[p], c_[1].values()[p], c_[2].values()[p]};
  }

  VectorFieldT& operator+=(const VectorFieldT& o) {
    for (int i = 0; i < 3; ++i) c_[i] += o.c_[i];
    return *this;
  }
  VectorFieldT& operator-=(const VectorFieldT& o) {
    for (int i = 0; i < 3; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  VectorFieldT& operator*=(Scalar s) {
    for (auto& c : c_) c *= s;
    return *this;
  }

 private:
  std::array<Component, 3> c_;
};

template <typename Scalar>
VectorFieldT<Scalar> operator+(VectorFieldT<Scalar> a, const VectorFieldT<Scalar>& b) {
  return a += b;
}
template <typename Scalar>
VectorFieldT<Scalar> operator-(VectorFieldT<Scalar> a, const VectorFieldT<Scalar>& b) {
  return a -= b;
}
template <typename Scalar>
VectorFieldT<Scalar> operator*(Scalar s, VectorFieldT<Scalar> a) {
  return a *= s;
}

/// 3x3 tensor field, component (r, c) stored at 3 * r + c.
template <typename Scalar>
class TensorFieldT {
 public:
  using Component = ScalarFieldT<Scalar>;
  using Matrix = Eigen::Matrix<Scalar, 3, 3>;

  TensorFieldT() = default;
  explicit TensorFieldT(const Grid& grid) {
    for (auto& c : c_) c = Component(grid);
  }

  static TensorFieldT identity(const Grid& grid) {
    TensorFieldT t(grid);
    for (int r = 0; r < 3; ++r) t(r, r).values().setConstant(Scalar(1));
    return t;
  }

  const Grid& grid() const { return c_[0].grid(); }
  const Component& operator()(int r, int c) const { return c_[3 * r + c]; }
  Component& operator()(int r, int c) { return c_[3 * r + c]; }
  bool all_finite() const {
    for (const auto& c : c_)
      if (!c.all_finite()) return false;
    return true;
  }

  Matrix at(Eigen::Index p) const {
    Matrix m;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m(r, c) = c_[3 * r + c].values()[p];
    return m;
  }
  void set(Eigen::Index p, const Matrix& m) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) c_[3 * r + c].values()[p] = m(r, c);
  }

  TensorFieldT& operator+=(const TensorFieldT& o) {
    for (int i = 0; i < 9; ++i) c_[i] += o.c_[i];
    return *this;
  }
  TensorFieldT& operator-=(const TensorFieldT& o) {
    for (int i = 0; i < 9; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  TensorFieldT& operator*=(Scalar s) {
    for (auto& c : c_) c *= s;
    return *this;
  }

 private:
  std::array<Component, 9> c_;
};

template <typename Scalar>
TensorFieldT<Scalar> operator+(TensorFieldT<Scalar> a, const TensorFieldT<Scalar>& b) {
  return a += b;
}
template <typename Scalar>
TensorFieldT<Scalar> operator-(TensorFieldT<Scalar> a, const TensorFieldT<Scalar>& b) {
  return a -= b;
}
template <typename Scalar>
TensorFieldT<Scalar> operator*(Scalar s, TensorFieldT<Scalar> a) {
  return a *= s;
}

/// Data on the top face S_F, indexed (i, j) -> i * ny + j.
template <typename Scalar>
class SurfaceFieldT {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  SurfaceFieldT() = default;
  explicit SurfaceFieldT(const Grid& grid, Scalar value = Scalar(0))
      : grid_(grid), values_(Array::Constant(grid.plane_size(), value)) {}
  SurfaceFieldT(const Grid& grid, Array values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.plane_size())
      throw FieldError("surface field size does not match grid");
  }

  template <typename Fn>
  static SurfaceFieldT sample(const Grid& grid, Fn&& fn) {
    SurfaceFieldT f(grid);
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.ny; ++j) f.values_[grid.column(i, j)] = fn(grid.x(i), grid.y(j));
    return f;
  }

  const Grid& grid() const { return grid_; }
  const Array& values() const { return values_; }
  Array& values() { return values_; }
  Scalar operator()(int i, int j) const { return values_[grid_.column(i, j)]; }
  Scalar& operator()(int i, int j) { return values_[grid_.column(i, j)]; }
  bool all_finite() const { return values_.allFinite(); }

  SurfaceFieldT& operator+=(const SurfaceFieldT& o) {
    values_ += o.values_;
    return *this;
  }
  SurfaceFieldT& operator-=(const SurfaceFieldT& o) {
    values_ -= o.values_;
    return *this;
  }
  SurfaceFieldT& operator*=(Scalar s) {
    values_ *= s;
    return *this;
  }

 private:
  Grid grid_;
  Array values_;
};

template <typename Scalar>
SurfaceFieldT<Scalar> operator+(SurfaceFieldT<Scalar> a, const SurfaceFieldT<Scalar>& b) {
  return a += b;
}
template <typename Scalar>
SurfaceFieldT<Scalar> operator-(SurfaceFieldT<Scalar> a, const SurfaceFieldT<Scalar>& b) {
  return a -= b;
}
template <typename Scalar>
SurfaceFieldT<Scalar> operator*(Scalar s, SurfaceFieldT<Scalar> a) {
  return a *= s;
}

template <typename Scalar>
using SurfaceVectorFieldT = std::array<SurfaceFieldT<Scalar>, 3>;

using ScalarField = ScalarFieldT<double>;
using VectorField = VectorFieldT<double>;
using TensorField = TensorFieldT<double>;
using SurfaceField = SurfaceFieldT<double>;
using SurfaceVectorField = SurfaceVectorFieldT<double>;

// Vertical stencils. Both are written once here and shared by the field
// operators and by the per-wavenumber solvers so that solver rows and the
// independent residual checks use identical coefficients.
//
// First derivative: centered (f[k+1] - f[k-1]) / 2h in the interior,
// one-sided (-3 f0 + 4 f1 - f2) / 2h and (f[n-3] - 4 f[n-2] + 3 f[n-1]) / 2h
// on the faces.
//
// Compact second derivative: (f[k-1] - 2 f[k] + f[k+1]) / h^2 in the interior,
// (2 f0 - 5 f1 + 4 f2 - f3) / h^2 and its mirror on the faces.
namespace vertical {

template <typename Emit>
void first_derivative_row(int k, int nz, double h, Emit&& emit) {
  const double s = 1.0 / (2.0 * h);
  if (k == 0) {
    emit(0, -3.0 * s);
    emit(1, 4.0 * s);
    emit(2, -1.0 * s);
  } else if (k == nz - 1) {
    emit(nz - 3, 1.0 * s);
    emit(nz - 2, -4.0 * s);
    emit(nz - 1, 3.0 * s);
  } else {
    emit(k - 1, -1.0 * s);
    emit(k + 1, 1.0 * s);
  }
}

template <typename Emit>
void second_derivative_row(int k, int nz, double h, Emit&& emit) {
  const double s = 1.0 / (h * h);
  if (k == 0) {
    emit(0, 2.0 * s);
    emit(1, -5.0 * s);
    emit(2, 4.0 * s);
    emit(3, -1.0 * s);
  } else if (k == nz - 1) {
    emit(nz - 4, -1.0 * s);
    emit(nz - 3, 4.0 * s);
    emit(nz - 2, -5.0 * s);
    emit(nz - 1, 2.0 * s);
  } else {
    emit(k - 1, 1.0 * s);
    emit(k, -2.0 * s);
    emit(k + 1, 1.0 * s);
  }
}

/// out[k] = (D1 in)[k] for one contiguous column of length nz.
void apply_first_derivative(const double* in, double* out, int nz, double h);
void apply_second_derivative(const double* in, double* out, int nz, double h);

}  // namespace vertical

// Flat differential operators. Horizontal derivatives are spectral (the
// Nyquist mode is dropped from first derivatives), vertical derivatives use
// the stencils above.

ScalarField partial(const ScalarField& f, int axis);
VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& v);

/// divergence(gradient(f)). Vertically this is the centered first-derivative
/// stencil applied twice, i.e. (f[k+2] - 2 f[k] + f[k-2]) / 4h^2 away from
/// the faces, with the one-sided face rows entering near the boundary.
ScalarField laplacian(const ScalarField& f);

/// Spectral horizontal second derivatives (-|k_eff|^2) plus the compact
/// vertical second derivative. This is the Laplacian the implicit solvers
/// invert.
ScalarField laplacian_compact(const ScalarField& f);
VectorField laplacian_compact(const VectorField& v);

/// Velocity gradient, component (i, j) = d_j v_i.
TensorField velocity_gradient(const VectorField& v);

/// (a . grad) b with flat derivatives.
VectorField advective_derivative(const VectorField& a, const VectorField& b);

SurfaceField trace_top(const ScalarField& f);
SurfaceVectorField trace_top(const VectorField& v);
SurfaceField surface_partial(const SurfaceField& s, int axis);

/// Discrete L2 inner products and norms (trapezoid vertically).
double inner(const ScalarField& a, const ScalarField& b);
double l2_norm(const ScalarField& f);
double l2_norm(const VectorField& v);
double surface_inner(const SurfaceField& a, const SurfaceField& b);
double l2_norm(const SurfaceField& s);
double max_abs(const ScalarField& f);
double max_abs(const VectorField& v);
double max_abs(const SurfaceField& s);

void require_finite(const ScalarField& f, const char* where);
void require_finite(const VectorField& v, const char* where);

}  // namespace mhdlag
