#pragma once

#include "mhdlag/fields.hpp"

#include <Eigen/Core>

#include <complex>

namespace mhdlag {

using Complex = std::complex<double>;
using SpectralArray = Eigen::Array<Complex, Eigen::Dynamic, 1>;

/// Horizontal 2-D discrete Fourier transform applied plane by plane.
///
/// Arrays use the field layout (i, j, k) with k fastest; after `forward`
/// the (i, j) slots hold wavenumber indices. The forward transform is
/// unnormalized, `inverse` divides by nx * ny and keeps the real part.
class HorizontalTransform {
 public:
  explicit HorizontalTransform(const Grid& grid) : grid_(grid) {}

  SpectralArray forward(const Eigen::ArrayXd& values, int planes) const;
  Eigen::ArrayXd inverse(const SpectralArray& coeffs, int planes) const;

  SpectralArray forward(const ScalarField& f) const { return forward(f.values(), grid_.nz); }
  SpectralArray forward(const SurfaceField& s) const { return forward(s.values(), 1); }

  /// Signed wavenumber 2 pi m / L for index i (m folded to [-n/2, n/2]).
  double kx(int i) const;
  double ky(int j) const;
  /// Wavenumber used by first derivatives: zero for the Nyquist index.
  double kx_eff(int i) const { return (i == grid_.nx / 2) ? 0.0 : kx(i); }
  double ky_eff(int j) const { return (j == grid_.ny / 2) ? 0.0 : ky(j); }

  const Grid& grid() const { return grid_; }

 private:
  Grid grid_;
};

}  // namespace mhdlag
