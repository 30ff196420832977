#include "mhdlag/gagliardo.hpp"

#include "mhdlag/parallel.hpp"
#include "mhdlag/spectral.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace mhdlag {

namespace {

using Key = std::tuple<int, int, int, double, double, double, double>;

Key make_key(const Grid& g, double theta) { return {g.nx, g.ny, g.nz, g.lx, g.ly, g.depth, theta}; }

std::mutex cache_mutex;
std::map<Key, std::shared_ptr<const VolumeKernel>> volume_cache;
std::map<Key, Eigen::ArrayXd> surface_cache;

void check_theta(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw FieldError("Gagliardo order must lie in (0, 1)");
}

double min_image(int d, int n, double h) {
  d = std::abs(d) % n;
  return std::min(d, n - d) * h;
}

/// Horizontal offset plane for the kernel |r|^{-power}, vertical offset dz.
Eigen::ArrayXd offset_plane(const Grid& g, double dz, double power) {
  Eigen::ArrayXd plane(g.plane_size());
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const double dx = min_image(i, g.nx, g.hx());
      const double dy = min_image(j, g.ny, g.hy());
      const double r2 = dx * dx + dy * dy + dz * dz;
      plane[g.column(i, j)] = r2 > 0.0 ? std::pow(r2, -0.5 * power) : 0.0;
    }
  return plane;
}

std::shared_ptr<const VolumeKernel> build_volume_kernel(const Grid& g, double theta) {
  auto kern = std::make_shared<VolumeKernel>();
  kern->grid = g;
  kern->theta = theta;
  kern->khat.resize(g.nz);
  HorizontalTransform tr(g);
  const double power = 3.0 + 2.0 * theta;
  for (int dk = 0; dk < g.nz; ++dk)
    kern->khat[dk] = tr.forward(offset_plane(g, dk * g.hz(), power), 1).real();
  kern->row_sum.resize(g.nz);
  for (int kp = 0; kp < g.nz; ++kp) {
    double s = 0.0;
    for (int kq = 0; kq < g.nz; ++kq) s += g.z_weight(kq) * kern->khat[std::abs(kp - kq)][0];
    kern->row_sum[kp] = s * g.hx() * g.hy();
  }
  return kern;
}

}  // namespace

std::shared_ptr<const VolumeKernel> volume_kernel(const Grid& grid, double theta) {
  check_theta(theta);
  const Key key = make_key(grid, theta);
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = volume_cache.find(key);
  if (it != volume_cache.end()) return it->second;
  auto kern = build_volume_kernel(grid, theta);
  volume_cache.emplace(key, kern);
  return kern;
}

void clear_kernel_cache() {
  std::lock_guard<std::mutex> lock(cache_mutex);
  volume_cache.clear();
  surface_cache.clear();
}

double gagliardo_volume_sq(const ScalarField& f, double theta) {
  const Grid& g = f.grid();
  const auto kern = volume_kernel(g, theta);
  const double hxy = g.hx() * g.hy();
  const int nz = g.nz;

  double diag = 0.0;
  for (Eigen::Index c = 0; c < g.plane_size(); ++c) {
    double col = 0.0;
    for (int k = 0; k < nz; ++k) {
      const double v = f.values()[c * nz + k];
      col += g.z_weight(k) * kern->row_sum[k] * v * v;
    }
    diag += col;
  }
  diag *= 2.0 * hxy;

  HorizontalTransform tr(g);
  const SpectralArray fh = tr.forward(f);
  std::vector<double> wz(nz);
  for (int k = 0; k < nz; ++k) wz[k] = g.z_weight(k);
  Eigen::ArrayXd per_mode(g.plane_size());
  parallel_for(std::size_t(g.plane_size()), [&](std::size_t m) {
    const Complex* col = fh.data() + m * nz;
    double acc = 0.0;
    for (int kp = 0; kp < nz; ++kp) {
      acc += wz[kp] * wz[kp] * std::norm(col[kp]) * kern->khat[0][m];
      for (int kq = kp + 1; kq < nz; ++kq)
        acc += 2.0 * wz[kp] * wz[kq] * (std::conj(col[kp]) * col[kq]).real() * kern->khat[kq - kp][m];
    }
    per_mode[m] = acc;
  });
  const double cross = per_mode.sum() * hxy * hxy / double(g.plane_size());
  return std::max(0.0, diag - 2.0 * cross);
}

double gagliardo_volume_sq_naive(const ScalarField& f, double theta) {
  check_theta(theta);
  const Grid& g = f.grid();
  const double power = 3.0 + 2.0 * theta;
  double total = 0.0;
  for (int ip = 0; ip < g.nx; ++ip)
    for (int jp = 0; jp < g.ny; ++jp)
      for (int kp = 0; kp < g.nz; ++kp) {
        const double fp = f(ip, jp, kp);
        const double wp = g.cell_weight(kp);
        for (int iq = 0; iq < g.nx; ++iq)
          for (int jq = 0; jq < g.ny; ++jq)
            for (int kq = 0; kq < g.nz; ++kq) {
              if (ip == iq && jp == jq && kp == kq) continue;
              const double dx = min_image(ip - iq, g.nx, g.hx());
              const double dy = min_image(jp - jq, g.ny, g.hy());
              const double dz = (kp - kq) * g.hz();
              const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
              const double d = fp - f(iq, jq, kq);
              total += wp * g.cell_weight(kq) * d * d / std::pow(r, power);
            }
      }
  return total;
}

const Eigen::ArrayXd& surface_multiplier(const Grid& grid, double theta) {
  check_theta(theta);
  const Key key = make_key(grid, theta);
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = surface_cache.find(key);
  if (it != surface_cache.end()) return it->second;
  HorizontalTransform tr(grid);
  const Eigen::ArrayXd khat = tr.forward(offset_plane(grid, 0.0, 2.0 + 2.0 * theta), 1).real();
  const double hxy = grid.hx() * grid.hy();
  Eigen::ArrayXd sigma = (2.0 * hxy * hxy / double(grid.plane_size())) * (khat[0] - khat);
  return surface_cache.emplace(key, std::move(sigma)).first->second;
}

double gagliardo_surface_sq(const SurfaceField& s, double theta) {
  const Eigen::ArrayXd& sigma = surface_multiplier(s.grid(), theta);
  HorizontalTransform tr(s.grid());
  return (sigma * tr.forward(s).abs2()).sum();
}

double gagliardo_surface_sq_naive(const SurfaceField& s, double theta) {
  check_theta(theta);
  const Grid& g = s.grid();
  const double power = 2.0 + 2.0 * theta;
  const double w = g.hx() * g.hy();
  double total = 0.0;
  for (int ip = 0; ip < g.nx; ++ip)
    for (int jp = 0; jp < g.ny; ++jp)
      for (int iq = 0; iq < g.nx; ++iq)
        for (int jq = 0; jq < g.ny; ++jq) {
          if (ip == iq && jp == jq) continue;
          const double dx = min_image(ip - iq, g.nx, g.hx());
          const double dy = min_image(jp - jq, g.ny, g.hy());
          const double d = s(ip, jp) - s(iq, jq);
          total += w * w * d * d / std::pow(dx * dx + dy * dy, 0.5 * power);
        }
  return total;
}

Eigen::VectorXd trapezoid_weights(const std::vector<double>& times) {
  const std::size_t n = times.size();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(Eigen::Index(n));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = times[i + 1] - times[i];
    w[Eigen::Index(i)] += 0.5 * h;
    w[Eigen::Index(i + 1)] += 0.5 * h;
  }
  return w;
}

double gagliardo_time_sq(const std::vector<double>& times, const Eigen::MatrixXd& dist2, double theta) {
  check_theta(theta);
  const Eigen::VectorXd w = trapezoid_weights(times);
  const Eigen::Index n = w.size();
  double total = 0.0;
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a + 1; b < n; ++b)
      total += 2.0 * w[a] * w[b] * dist2(a, b) / std::pow(std::abs(times[b] - times[a]), 1.0 + 2.0 * theta);
  return total;
}

}  // namespace mhdlag
