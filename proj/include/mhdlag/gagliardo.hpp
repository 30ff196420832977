#pragma once

// Gagliardo double sums on the slab and on the top face.
//
// Volume seminorm of order theta in (0, 1):
//
//   |f|^2 = sum_{p != q} w_p w_q |f_p - f_q|^2 / |x_p - x_q|^{3 + 2 theta}
//
// with w_p = hx hy wz(k) (trapezoid vertically) and horizontal distances
// taken by the minimum image. The surface version uses w = hx hy and the
// exponent 2 + 2 theta.
//
// The fast path expands |f_p - f_q|^2 and evaluates the cross term per
// horizontal wavenumber. The kernel only depends on the horizontal offset and
// on |k_p - k_q|, so one table of nz transformed planes serves every field on
// the grid. Tables are cached by (grid, theta).

#include "mhdlag/fields.hpp"

#include <memory>
#include <vector>

namespace mhdlag {

struct VolumeKernel {
  Grid grid;
  double theta = 0.0;
  /// khat[dk] holds the horizontal DFT of K(., ., dk); real because K is even.
  std::vector<Eigen::ArrayXd> khat;
  /// row_sum[k] = sum_{q != p} w_q K(p, q) for any p on level k.
  Eigen::ArrayXd row_sum;
};

std::shared_ptr<const VolumeKernel> volume_kernel(const Grid& grid, double theta);

/// Squared volume seminorm, fast path.
double gagliardo_volume_sq(const ScalarField& f, double theta);
/// Squared volume seminorm by the plain O(N^2) double loop.
double gagliardo_volume_sq_naive(const ScalarField& f, double theta);

/// Nonnegative multiplier sigma with |s|^2 = sum_m sigma_m |s_hat_m|^2 for the
/// unnormalized horizontal DFT s_hat.
const Eigen::ArrayXd& surface_multiplier(const Grid& grid, double theta);

double gagliardo_surface_sq(const SurfaceField& s, double theta);
double gagliardo_surface_sq_naive(const SurfaceField& s, double theta);

/// Temporal seminorm from pairwise squared distances:
///   sum_{n != m} w_n w_m dist2(n, m) / |t_n - t_m|^{1 + 2 theta}
/// with trapezoid weights w over the (possibly nonuniform) times.
double gagliardo_time_sq(const std::vector<double>& times, const Eigen::MatrixXd& dist2, double theta);

/// Trapezoid weights for the given time nodes.
Eigen::VectorXd trapezoid_weights(const std::vector<double>& times);

void clear_kernel_cache();

}  // namespace mhdlag
