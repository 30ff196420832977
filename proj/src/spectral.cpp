#include "mhdlag/spectral.hpp"

#include "mhdlag/parallel.hpp"

#include <unsupported/Eigen/FFT>

#include <numbers>
#include <vector>

namespace mhdlag {

namespace {

enum class Direction { forward, inverse };

void transform_plane(Eigen::FFT<double>& fft, std::vector<Complex>& plane, int nx, int ny,
                     Direction dir, std::vector<Complex>& in, std::vector<Complex>& out) {
  in.resize(ny);
  out.resize(ny);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) in[j] = plane[static_cast<std::size_t>(i) * ny + j];
    if (dir == Direction::forward)
      fft.fwd(out, in);
    else
      fft.inv(out, in);
    for (int j = 0; j < ny; ++j) plane[static_cast<std::size_t>(i) * ny + j] = out[j];
  }
  in.resize(nx);
  out.resize(nx);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) in[i] = plane[static_cast<std::size_t>(i) * ny + j];
    if (dir == Direction::forward)
      fft.fwd(out, in);
    else
      fft.inv(out, in);
    for (int i = 0; i < nx; ++i) plane[static_cast<std::size_t>(i) * ny + j] = out[i];
  }
}

}  // namespace

SpectralArray HorizontalTransform::forward(const Eigen::ArrayXd& values, int planes) const {
  const int nx = grid_.nx, ny = grid_.ny;
  SpectralArray out(values.size());
  parallel_for(static_cast<std::size_t>(planes), [&](std::size_t k) {
    Eigen::FFT<double> fft;
    std::vector<Complex> plane(static_cast<std::size_t>(nx) * ny), a, b;
    for (Eigen::Index c = 0; c < Eigen::Index(nx) * ny; ++c) plane[c] = values[c * planes + k];
    transform_plane(fft, plane, nx, ny, Direction::forward, a, b);
    for (Eigen::Index c = 0; c < Eigen::Index(nx) * ny; ++c) out[c * planes + k] = plane[c];
  });
  return out;
}

Eigen::ArrayXd HorizontalTransform::inverse(const SpectralArray& coeffs, int planes) const {
  const int nx = grid_.nx, ny = grid_.ny;
  Eigen::ArrayXd out(coeffs.size());
  parallel_for(static_cast<std::size_t>(planes), [&](std::size_t k) {
    Eigen::FFT<double> fft;
    std::vector<Complex> plane(static_cast<std::size_t>(nx) * ny), a, b;
    for (Eigen::Index c = 0; c < Eigen::Index(nx) * ny; ++c) plane[c] = coeffs[c * planes + k];
    transform_plane(fft, plane, nx, ny, Direction::inverse, a, b);
    for (Eigen::Index c = 0; c < Eigen::Index(nx) * ny; ++c) out[c * planes + k] = plane[c].real();
  });
  return out;
}

double HorizontalTransform::kx(int i) const {
  const int m = (i <= grid_.nx / 2) ? i : i - grid_.nx;
  return 2.0 * std::numbers::pi * m / grid_.lx;
}

double HorizontalTransform::ky(int j) const {
  const int m = (j <= grid_.ny / 2) ? j : j - grid_.ny;
  return 2.0 * std::numbers::pi * m / grid_.ly;
}

}  // namespace mhdlag
