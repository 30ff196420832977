#pragma once

// Lagrangian kinematics: accumulated displacement gradient A = int_0^t Dv,
// cotangent matrix G = (I + A)^{-t} and the operators grad_v = G grad.

#include "mhdlag/fields.hpp"

#include <vector>

namespace mhdlag {

class DegenerateMapError : public FieldError {
 public:
  DegenerateMapError(const std::string& what, int i, int j, int k, double t, double value)
      : FieldError(what), i(i), j(j), k(k), time(t), value(value) {}
  int i, j, k;
  double time;
  double value;
};

struct DeformationState {
  TensorField a;      // accumulated displacement gradient
  TensorField g_mat;  // (I + a)^{-t}
  ScalarField jac;    // det(I + a)
  double t = 0.0;

  static DeformationState initial(const Grid& grid);
};

/// det(I + a) pointwise.
ScalarField jacobian_det(const TensorField& a);

/// (I + a)^{-t} pointwise through the cofactor matrix. Throws
/// DegenerateMapError at the first point (in storage order) where
/// det(I + a) <= jac_floor.
TensorField cotangent_matrix(const TensorField& a, double jac_floor = 0.1, double t = 0.0);

/// a_new = a_prev + dt/2 (Dv + Dv_prev) when `v_prev` is given, otherwise
/// a_prev + dt Dv.
DeformationState accumulate_displacement(const DeformationState& prev, const VectorField& v, double dt,
                                         const VectorField* v_prev = nullptr, double jac_floor = 0.1);

/// Deformation states at every level of a velocity series, trapezoid in time,
/// starting from `initial` (identity map when null).
std::vector<DeformationState> deformation_history(const std::vector<VectorField>& v, double dt,
                                                  double jac_floor = 0.1, const DeformationState* initial = nullptr);

/// G grad f. With G = I the result equals gradient(f) bit for bit.
VectorField transformed_gradient(const TensorField& g_mat, const ScalarField& f);
ScalarField transformed_divergence(const TensorField& g_mat, const VectorField& v);
ScalarField transformed_laplacian(const TensorField& g_mat, const ScalarField& f);
VectorField transformed_laplacian(const TensorField& g_mat, const VectorField& v);

/// Component (i, j) = (G grad)_j v_i.
TensorField transformed_velocity_gradient(const TensorField& g_mat, const VectorField& v);

/// Symmetric part of the transformed velocity gradient.
TensorField deformation_tensor(const TensorField& g_mat, const VectorField& v);

/// G n0 / |G n0| on the top face, with G restricted to the top nodes.
SurfaceVectorField transformed_normal(const TensorField& g_mat, const SurfaceVectorField& n0);

/// Constant upward reference normal e3 on the top face.
SurfaceVectorField reference_normal(const Grid& grid);

}  // namespace mhdlag
