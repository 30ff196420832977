#include "mhdlag/lagrangian.hpp"

#include "mhdlag/parallel.hpp"

#include <Eigen/Dense>

#include <sstream>

namespace mhdlag {

namespace {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

Mat3 identity_plus(const TensorField& a, Eigen::Index p) { return Mat3::Identity() + a.at(p); }

double det3(const Mat3& m) { return m.row(0).dot(m.row(1).cross(m.row(2))); }

[[noreturn]] void throw_degenerate(const Grid& g, Eigen::Index p, double t, double value, double floor) {
  const int k = int(p % g.nz);
  const int j = int((p / g.nz) % g.ny);
  const int i = int(p / (Eigen::Index(g.nz) * g.ny));
  std::ostringstream os;
  os << "degenerate Lagrangian map: det(I+A) = " << value << " <= " << floor << " at (i,j,k) = (" << i
     << "," << j << "," << k << "), t = " << t;
  throw DegenerateMapError(os.str(), i, j, k, t, value);
}

}  // namespace

DeformationState DeformationState::initial(const Grid& grid) {
  return {TensorField(grid), TensorField::identity(grid), ScalarField(grid, 1.0), 0.0};
}

ScalarField jacobian_det(const TensorField& a) {
  const Grid& g = a.grid();
  ScalarField out(g);
  for (Eigen::Index p = 0; p < g.size(); ++p) out.values()[p] = det3(identity_plus(a, p));
  return out;
}

TensorField cotangent_matrix(const TensorField& a, double jac_floor, double t) {
  const Grid& g = a.grid();
  TensorField out(g);
  Eigen::ArrayXd det(g.size());
  parallel_for(std::size_t(g.plane_size()), [&](std::size_t c) {
    for (int k = 0; k < g.nz; ++k) {
      const Eigen::Index p = Eigen::Index(c) * g.nz + k;
      const Mat3 m = identity_plus(a, p);
      // Rows of the cofactor matrix are cross products of the other two rows.
      Mat3 cof;
      cof.row(0) = m.row(1).cross(m.row(2));
      cof.row(1) = m.row(2).cross(m.row(0));
      cof.row(2) = m.row(0).cross(m.row(1));
      det[p] = m.row(0).dot(cof.row(0));
      out.set(p, cof / det[p]);
    }
  });
  for (Eigen::Index p = 0; p < g.size(); ++p)
    if (!(det[p] > jac_floor)) throw_degenerate(g, p, t, det[p], jac_floor);
  return out;
}

DeformationState accumulate_displacement(const DeformationState& prev, const VectorField& v, double dt,
                                         const VectorField* v_prev, double jac_floor) {
  if (!(dt > 0.0)) throw FieldError("accumulate_displacement: dt must be positive");
  require_same_space(prev.a.grid(), v.grid(), "accumulate_displacement");
  require_finite(v, "accumulate_displacement");
  DeformationState next;
  next.t = prev.t + dt;
  next.a = prev.a;
  if (v_prev) {
    TensorField sum = velocity_gradient(v) + velocity_gradient(*v_prev);
    next.a += (0.5 * dt) * sum;
  } else {
    next.a += dt * velocity_gradient(v);
  }
  next.g_mat = cotangent_matrix(next.a, jac_floor, next.t);
  next.jac = jacobian_det(next.a);
  return next;
}

std::vector<DeformationState> deformation_history(const std::vector<VectorField>& v, double dt,
                                                  double jac_floor, const DeformationState* initial) {
  std::vector<DeformationState> out;
  if (v.empty()) return out;
  out.reserve(v.size());
  out.push_back(initial ? *initial : DeformationState::initial(v.front().grid()));
  for (std::size_t n = 1; n < v.size(); ++n)
    out.push_back(accumulate_displacement(out.back(), v[n], dt, &v[n - 1], jac_floor));
  return out;
}

VectorField transformed_gradient(const TensorField& g_mat, const ScalarField& f) {
  require_same_space(g_mat.grid(), f.grid(), "transformed_gradient");
  const VectorField d = gradient(f);
  VectorField out(f.grid());
  for (int r = 0; r < 3; ++r) {
    auto& o = out[r].values();
    o = g_mat(r, 0).values() * d[0].values();
    o += g_mat(r, 1).values() * d[1].values();
    o += g_mat(r, 2).values() * d[2].values();
  }
  return out;
}

ScalarField transformed_divergence(const TensorField& g_mat, const VectorField& v) {
  ScalarField out = transformed_gradient(g_mat, v[0])[0];
  out.values() += transformed_gradient(g_mat, v[1])[1].values();
  out.values() += transformed_gradient(g_mat, v[2])[2].values();
  return out;
}

ScalarField transformed_laplacian(const TensorField& g_mat, const ScalarField& f) {
  return transformed_divergence(g_mat, transformed_gradient(g_mat, f));
}

VectorField transformed_laplacian(const TensorField& g_mat, const VectorField& v) {
  return VectorField(transformed_laplacian(g_mat, v[0]), transformed_laplacian(g_mat, v[1]),
                     transformed_laplacian(g_mat, v[2]));
}

TensorField transformed_velocity_gradient(const TensorField& g_mat, const VectorField& v) {
  TensorField out(v.grid());
  for (int i = 0; i < 3; ++i) {
    VectorField gi = transformed_gradient(g_mat, v[i]);
    for (int j = 0; j < 3; ++j) out(i, j) = std::move(gi[j]);
  }
  return out;
}

TensorField deformation_tensor(const TensorField& g_mat, const VectorField& v) {
  const TensorField dv = transformed_velocity_gradient(g_mat, v);
  TensorField out(v.grid());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(i, j).values() = 0.5 * (dv(i, j).values() + dv(j, i).values());
  return out;
}

SurfaceVectorField transformed_normal(const TensorField& g_mat, const SurfaceVectorField& n0) {
  const Grid& g = g_mat.grid();
  SurfaceVectorField out{SurfaceField(g), SurfaceField(g), SurfaceField(g)};
  for (Eigen::Index c = 0; c < g.plane_size(); ++c) {
    const Mat3 m = g_mat.at(c * g.nz + g.nz - 1);
    const Vec3 n = m * Vec3(n0[0].values()[c], n0[1].values()[c], n0[2].values()[c]);
    const double len = n.norm();
    if (!(len > 1e-14)) {
      std::ostringstream os;
      os << "degenerate transformed normal at surface column " << c;
      throw DegenerateMapError(os.str(), int(c / g.ny), int(c % g.ny), g.nz - 1, 0.0, len);
    }
    for (int r = 0; r < 3; ++r) out[r].values()[c] = n[r] / len;
  }
  return out;
}

SurfaceVectorField reference_normal(const Grid& grid) {
  return {SurfaceField(grid), SurfaceField(grid), SurfaceField(grid, 1.0)};
}

}  // namespace mhdlag
