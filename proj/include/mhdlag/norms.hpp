#pragma once

// Sobolev-Slobodetskii norms on the slab, its top face and the time interval.
//
// Spatial orders s in [0, 3) are split as s = m + theta. The squared norm is
// the sum of ||D^a f||^2 over multi-indices with |a| <= m, plus the Gagliardo
// seminorm of order theta of every D^a f with |a| = m (theta > 0 only). The
// six second derivatives are counted once each.
//
// Time series carry explicit time stamps; time integrals use the trapezoid
// rule on them, so a series can be subsampled in time before a norm is taken.

#include "mhdlag/fields.hpp"

#include <map>
#include <string>
#include <vector>

namespace mhdlag {

class NormError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Field>
struct Series {
  std::vector<double> t;
  std::vector<Field> u;

  std::size_t size() const { return u.size(); }
  double duration() const { return t.empty() ? 0.0 : t.back() - t.front(); }
  const Grid& grid() const { return u.front().grid(); }
  void push_back(double time, Field f) {
    t.push_back(time);
    u.push_back(std::move(f));
  }
};

using ScalarSeries = Series<ScalarField>;
using VectorSeries = Series<VectorField>;
using TensorSeries = Series<TensorField>;
using SurfaceSeries = Series<SurfaceField>;

/// Levels 0, stride, 2 stride, ... plus the last level.
template <typename Field>
Series<Field> subsample(const Series<Field>& s, int stride) {
  if (stride <= 1) return s;
  Series<Field> out;
  for (std::size_t n = 0; n < s.size(); n += std::size_t(stride)) out.push_back(s.t[n], s.u[n]);
  if ((s.size() - 1) % std::size_t(stride) != 0) out.push_back(s.t.back(), s.u.back());
  return out;
}

/// Restriction to levels with t <= t_end (inclusive, with a small slack).
template <typename Field>
Series<Field> truncate(const Series<Field>& s, double t_end) {
  Series<Field> out;
  for (std::size_t n = 0; n < s.size(); ++n)
    if (s.t[n] <= t_end + 1e-12 * (1.0 + std::abs(t_end))) out.push_back(s.t[n], s.u[n]);
  return out;
}

// Spatial norms.
double sobolev_norm(const ScalarField& f, double s);
double sobolev_norm(const VectorField& v, double s);
double sobolev_norm(const TensorField& a, double s);
double sobolev_norm(const SurfaceField& f, double s);
/// Homogeneous part only (the top-order terms).
double sobolev_seminorm(const ScalarField& f, double s);
double sobolev_seminorm(const SurfaceField& f, double s);

// Space-time norms. The spatial order is l, the temporal order l / 2.
double anisotropic_norm(const ScalarSeries& u, double l);
double anisotropic_norm(const VectorSeries& u, double l);
double anisotropic_norm(const TensorSeries& u, double l);

/// H_gamma^{l, l/2} for l in (0, 2): e^{-2 gamma t} weighted homogeneous
/// spatial part, gamma^l L2 part and the difference integral against the zero
/// extension to t < 0 (the tail beyond tau = t is t^{-l} / l ||u(t)||^2).
double weighted_norm_hgamma(const ScalarSeries& u, double l, double gamma);
double weighted_norm_hgamma(const VectorSeries& u, double l, double gamma);

/// Parts of the gamma-weighted temporal difference integral, for tests.
struct HgammaParts {
  double spatial = 0.0;  // int e^{-2 gamma t} |u|^2_{W^l dot} dt
  double lower = 0.0;    // gamma^l int e^{-2 gamma t} ||u||^2 dt
  double interior = 0.0; // tau < t part of the difference integral
  double tail = 0.0;     // tau > t part (zero extension)
};
HgammaParts hgamma_parts(const ScalarSeries& u, double l, double gamma);

/// W^{l+1/2, l/2+1/4} on the top face over time.
double boundary_norm(const SurfaceSeries& u, double l);
/// H_gamma^{l+1/2, 1/2, l/2} on the top face.
double boundary_norm_hgamma(const SurfaceSeries& u, double l, double gamma);

/// ||u||^(l): anisotropic W^{l,l/2} plus T^{-l} ||u||^2_{L2(Q_T)}.
double triple_norm(const ScalarSeries& u, double l);
double triple_norm(const VectorSeries& u, double l);
/// ||u||^(l+2): adds the six second derivatives in ||.||^(l) and the L2
/// norms of u and its first derivatives.
double triple_norm_l2(const ScalarSeries& u, double l);
double triple_norm_l2(const VectorSeries& u, double l);

/// H^{l+2, l/2+1}: ||u||^(l+2) plus the sup over levels of ||u(t)||_{W^{l+1}}.
double solution_norm(const ScalarSeries& u, double l);
double solution_norm(const VectorSeries& u, double l);
/// The sup term alone.
double sup_spatial_norm(const VectorSeries& u, double s);

double l2_space_time(const ScalarSeries& u);
double l2_space_time(const VectorSeries& u);

struct NormReport {
  std::map<std::string, double> values;
  double l = 0.0;
  double gamma = 0.0;
  double T = 0.0;
  std::string grid;

  void set(const std::string& name, double value);
  std::string to_json() const;
};

std::string describe(const Grid& g);

}  // namespace mhdlag
