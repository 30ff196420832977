#include "mhdlag/norms.hpp"

#include "mhdlag/gagliardo.hpp"
#include "mhdlag/parallel.hpp"
#include "mhdlag/spectral.hpp"

#include "json.hpp"

#include <cmath>
#include <sstream>

namespace mhdlag {

namespace {

struct Order {
  int m;
  double theta;
};

Order split_order(double s) {
  if (!(s >= 0.0 && s < 3.0)) throw NormError("smoothness order must lie in [0, 3)");
  Order o{int(std::floor(s)), s - std::floor(s)};
  if (o.theta < 1e-12) o.theta = 0.0;
  return o;
}

/// Nondecreasing axis lists of the given length: each multi-index once.
std::vector<std::vector<int>> multi_indices(int order, int dims) {
  std::vector<std::vector<int>> out;
  if (order == 0) return {{}};
  for (const auto& lower : multi_indices(order - 1, dims))
    for (int a = lower.empty() ? 0 : lower.back(); a < dims; ++a) {
      auto next = lower;
      next.push_back(a);
      out.push_back(std::move(next));
    }
  return out;
}

ScalarField derivative(const ScalarField& f, const std::vector<int>& axes) {
  ScalarField out = f;
  for (int a : axes) out = partial(out, a);
  return out;
}

SurfaceField derivative(const SurfaceField& f, const std::vector<int>& axes) {
  SurfaceField out = f;
  for (int a : axes) out = surface_partial(out, a);
  return out;
}

double l2_sq(const ScalarField& f) { return inner(f, f); }
double l2_sq(const SurfaceField& f) { return surface_inner(f, f); }
double seminorm_sq(const ScalarField& f, double theta) { return gagliardo_volume_sq(f, theta); }
double seminorm_sq(const SurfaceField& f, double theta) { return gagliardo_surface_sq(f, theta); }
constexpr int dims_of(const ScalarField*) { return 3; }
constexpr int dims_of(const SurfaceField*) { return 2; }

template <typename Field>
double sobolev_sq(const Field& f, double s, bool homogeneous) {
  const Order o = split_order(s);
  const int dims = dims_of(static_cast<const Field*>(nullptr));
  double total = 0.0;
  for (int order = homogeneous ? o.m : 0; order <= o.m; ++order)
    for (const auto& alpha : multi_indices(order, dims)) {
      const Field d = derivative(f, alpha);
      if (order < o.m || o.theta == 0.0) total += l2_sq(d);
      if (order == o.m && o.theta > 0.0) total += seminorm_sq(d, o.theta);
    }
  return total;
}

// Component views so scalar, vector and tensor series share one code path.
template <typename Field>
using Components = std::vector<std::vector<const Field*>>;

Components<ScalarField> components(const ScalarSeries& s) {
  Components<ScalarField> c(1);
  for (const auto& f : s.u) c[0].push_back(&f);
  return c;
}

Components<ScalarField> components(const VectorSeries& s) {
  Components<ScalarField> c(3);
  for (int i = 0; i < 3; ++i)
    for (const auto& f : s.u) c[i].push_back(&f[i]);
  return c;
}

Components<ScalarField> components(const TensorSeries& s) {
  Components<ScalarField> c(9);
  for (int i = 0; i < 9; ++i)
    for (const auto& f : s.u) c[i].push_back(&f(i / 3, i % 3));
  return c;
}

Components<SurfaceField> components(const SurfaceSeries& s) {
  Components<SurfaceField> c(1);
  for (const auto& f : s.u) c[0].push_back(&f);
  return c;
}

void check_series(const std::vector<double>& t, std::size_t levels) {
  if (levels < 2 || t.size() != levels) throw NormError("time series needs at least two levels");
  for (std::size_t n = 1; n < t.size(); ++n)
    if (!(t[n] > t[n - 1])) throw NormError("time stamps must increase");
}

template <typename Field>
std::vector<Field> time_derivative(const std::vector<const Field*>& u, const std::vector<double>& t) {
  const std::size_t n = u.size();
  std::vector<Field> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 == n ? i : i + 1;
    Field d = *u[b];
    d -= *u[a];
    d *= 1.0 / (t[b] - t[a]);
    out.push_back(std::move(d));
  }
  return out;
}

template <typename Field>
std::vector<const Field*> pointers(const std::vector<Field>& v) {
  std::vector<const Field*> p;
  for (const auto& f : v) p.push_back(&f);
  return p;
}

template <typename Field>
Eigen::MatrixXd pair_distances(const std::vector<const Field*>& u) {
  const Eigen::Index n = Eigen::Index(u.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  parallel_for(std::size_t(n), [&](std::size_t a) {
    for (Eigen::Index b = Eigen::Index(a) + 1; b < n; ++b) {
      Field diff = *u[a];
      diff -= *u[b];
      d(Eigen::Index(a), b) = l2_sq(diff);
    }
  });
  return d.selfadjointView<Eigen::Upper>();
}

/// Squared W^{sx, st} norm of one component over the series.
template <typename Field>
double space_time_sq(const std::vector<const Field*>& u, const std::vector<double>& t, double sx, double st) {
  const Eigen::VectorXd w = trapezoid_weights(t);
  Eigen::VectorXd spatial(w.size());
  parallel_for(u.size(), [&](std::size_t n) { spatial[Eigen::Index(n)] = sobolev_sq(*u[n], sx, false); });
  double total = w.dot(spatial);

  const Order o = split_order(st);
  std::vector<Field> deriv;
  std::vector<const Field*> level = u;
  for (int j = 0; j <= o.m; ++j) {
    if (j > 0) {
      deriv = time_derivative(level, t);
      level = pointers(deriv);
    }
    if (j < o.m || o.theta == 0.0)
      for (std::size_t n = 0; n < level.size(); ++n) total += w[Eigen::Index(n)] * l2_sq(*level[n]);
    if (j == o.m && o.theta > 0.0) {
      for (std::size_t n = 0; n < level.size(); ++n) total += w[Eigen::Index(n)] * l2_sq(*level[n]);
      total += gagliardo_time_sq(t, pair_distances(level), o.theta);
    }
  }
  return total;
}

template <typename Field>
double l2_space_time_sq(const std::vector<const Field*>& u, const std::vector<double>& t) {
  const Eigen::VectorXd w = trapezoid_weights(t);
  double total = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) total += w[Eigen::Index(n)] * l2_sq(*u[n]);
  return total;
}

double triple_sq(const std::vector<const ScalarField*>& u, const std::vector<double>& t, double l) {
  const double T = t.back() - t.front();
  return space_time_sq(u, t, l, 0.5 * l) + std::pow(T, -l) * l2_space_time_sq(u, t);
}

double triple_l2_sq(const std::vector<const ScalarField*>& u, const std::vector<double>& t, double l) {
  double total = triple_sq(u, t, l) + l2_space_time_sq(u, t);
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<ScalarField> d;
    for (const auto* f : u) d.push_back(partial(*f, axis));
    total += l2_space_time_sq(pointers(d), t);
  }
  for (const auto& alpha : multi_indices(2, 3)) {
    std::vector<ScalarField> d;
    for (const auto* f : u) d.push_back(derivative(*f, alpha));
    total += triple_sq(pointers(d), t, l);
  }
  return total;
}

/// Piecewise-linear product integration of int phi(t) (t - t0)^{-l} dt.
double singular_integral(const std::vector<double>& t, const Eigen::VectorXd& phi, double l) {
  double total = 0.0;
  for (std::size_t n = 0; n + 1 < t.size(); ++n) {
    const double a = t[n] - t.front(), b = t[n + 1] - t.front();
    const double i0 = (std::pow(b, 1 - l) - std::pow(a, 1 - l)) / (1 - l);
    const double i1 = (std::pow(b, 2 - l) - std::pow(a, 2 - l)) / (2 - l);
    const double slope = (phi[Eigen::Index(n + 1)] - phi[Eigen::Index(n)]) / (b - a);
    total += phi[Eigen::Index(n)] * i0 + slope * (i1 - a * i0);
  }
  return total;
}

/// Interior (tau < t) part of the H_gamma difference integral given pair
/// distances. The inner tau-integral reuses the outer trapezoid weights, so
/// at gamma = 0 this is exactly half the temporal Gagliardo double sum.
double hgamma_interior(const std::vector<double>& t, const Eigen::MatrixXd& dist2, double l, double gamma) {
  const Eigen::VectorXd w = trapezoid_weights(t);
  double total = 0.0;
  for (std::size_t n = 0; n < t.size(); ++n) {
    double inner_sum = 0.0;
    for (std::size_t m = 0; m < n; ++m)
      inner_sum += w[Eigen::Index(m)] * dist2(Eigen::Index(n), Eigen::Index(m)) / std::pow(t[n] - t[m], 1 + l);
    total += w[Eigen::Index(n)] * std::exp(-2 * gamma * (t[n] - t.front())) * inner_sum;
  }
  return total;
}

void check_hgamma(double l, double gamma) {
  if (!(gamma >= 0.0)) throw NormError("gamma must be nonnegative");
  if (!(l > 0.0 && l < 1.0)) throw NormError("H_gamma norms are implemented for l in (0, 1)");
}

HgammaParts hgamma_parts_components(const Components<ScalarField>& comps, const std::vector<double>& t, double l,
                                    double gamma) {
  check_hgamma(l, gamma);
  HgammaParts parts;
  const Eigen::VectorXd w = trapezoid_weights(t);
  for (const auto& u : comps) {
    check_series(t, u.size());
    Eigen::VectorXd phi(w.size());
    for (std::size_t n = 0; n < u.size(); ++n) {
      const double e = std::exp(-2 * gamma * (t[n] - t.front()));
      const double l2 = l2_sq(*u[n]);
      parts.spatial += w[Eigen::Index(n)] * e * sobolev_sq(*u[n], l, true);
      parts.lower += std::pow(gamma, l) * w[Eigen::Index(n)] * e * l2;
      phi[Eigen::Index(n)] = e * l2 / l;
    }
    parts.interior += hgamma_interior(t, pair_distances(u), l, gamma);
    parts.tail += singular_integral(t, phi, l);
  }
  return parts;
}

template <typename SeriesT>
double anisotropic_impl(const SeriesT& s, double l) {
  double total = 0.0;
  for (const auto& u : components(s)) {
    check_series(s.t, u.size());
    total += space_time_sq(u, s.t, l, 0.5 * l);
  }
  return std::sqrt(total);
}

template <typename SeriesT>
double triple_impl(const SeriesT& s, double l) {
  double total = 0.0;
  for (const auto& u : components(s)) {
    check_series(s.t, u.size());
    total += triple_sq(u, s.t, l);
  }
  return std::sqrt(total);
}

template <typename SeriesT>
double triple_l2_impl(const SeriesT& s, double l) {
  double total = 0.0;
  for (const auto& u : components(s)) {
    check_series(s.t, u.size());
    total += triple_l2_sq(u, s.t, l);
  }
  return std::sqrt(total);
}

template <typename SeriesT>
double sup_sq(const SeriesT& s, double sx) {
  const auto comps = components(s);
  Eigen::VectorXd level(Eigen::Index(s.size()));
  parallel_for(s.size(), [&](std::size_t n) {
    double v = 0.0;
    for (const auto& u : comps) v += sobolev_sq(*u[n], sx, false);
    level[Eigen::Index(n)] = v;
  });
  return level.size() ? level.maxCoeff() : 0.0;
}

}  // namespace

double sobolev_norm(const ScalarField& f, double s) {
  require_finite(f, "sobolev_norm");
  return std::sqrt(sobolev_sq(f, s, false));
}

double sobolev_norm(const VectorField& v, double s) {
  require_finite(v, "sobolev_norm");
  return std::sqrt(sobolev_sq(v[0], s, false) + sobolev_sq(v[1], s, false) + sobolev_sq(v[2], s, false));
}

double sobolev_norm(const TensorField& a, double s) {
  double total = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) total += sobolev_sq(a(r, c), s, false);
  return std::sqrt(total);
}

double sobolev_norm(const SurfaceField& f, double s) {
  if (!f.all_finite()) throw FieldError("sobolev_norm: non-finite surface values");
  return std::sqrt(sobolev_sq(f, s, false));
}

double sobolev_seminorm(const ScalarField& f, double s) { return std::sqrt(sobolev_sq(f, s, true)); }
double sobolev_seminorm(const SurfaceField& f, double s) { return std::sqrt(sobolev_sq(f, s, true)); }

double anisotropic_norm(const ScalarSeries& u, double l) { return anisotropic_impl(u, l); }
double anisotropic_norm(const VectorSeries& u, double l) { return anisotropic_impl(u, l); }
double anisotropic_norm(const TensorSeries& u, double l) { return anisotropic_impl(u, l); }

HgammaParts hgamma_parts(const ScalarSeries& u, double l, double gamma) {
  return hgamma_parts_components(components(u), u.t, l, gamma);
}

double weighted_norm_hgamma(const ScalarSeries& u, double l, double gamma) {
  const HgammaParts p = hgamma_parts(u, l, gamma);
  return std::sqrt(p.spatial + p.lower + p.interior + p.tail);
}

double weighted_norm_hgamma(const VectorSeries& u, double l, double gamma) {
  const HgammaParts p = hgamma_parts_components(components(u), u.t, l, gamma);
  return std::sqrt(p.spatial + p.lower + p.interior + p.tail);
}

double boundary_norm(const SurfaceSeries& u, double l) {
  check_series(u.t, u.size());
  return std::sqrt(space_time_sq(components(u)[0], u.t, l + 0.5, 0.5 * l + 0.25));
}

double boundary_norm_hgamma(const SurfaceSeries& u, double l, double gamma) {
  check_hgamma(l, gamma);
  check_series(u.t, u.size());
  const Grid& g = u.grid();
  const auto& t = u.t;
  const Eigen::VectorXd w = trapezoid_weights(t);
  // W^{1/2} on the face is diagonal in Fourier space.
  const double hxy = g.hx() * g.hy();
  const Eigen::ArrayXd half = surface_multiplier(g, 0.5) + hxy / double(g.plane_size());
  HorizontalTransform tr(g);
  std::vector<SpectralArray> hat;
  for (const auto& s : u.u) hat.push_back(tr.forward(s));

  double total = 0.0;
  const Eigen::Index n = Eigen::Index(t.size());
  Eigen::VectorXd phi(n);
  Eigen::MatrixXd dist2 = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const double e = std::exp(-2 * gamma * (t[a] - t.front()));
    total += w[a] * e * (sobolev_sq(u.u[a], l + 0.5, true) + std::pow(gamma, l) * gagliardo_surface_sq(u.u[a], 0.5));
    phi[a] = e * (half * hat[a].abs2()).sum() / l;
    for (Eigen::Index b = 0; b < a; ++b) dist2(a, b) = dist2(b, a) = (half * (hat[a] - hat[b]).abs2()).sum();
  }
  total += hgamma_interior(t, dist2, l, gamma) + singular_integral(t, phi, l);
  return std::sqrt(total);
}

double triple_norm(const ScalarSeries& u, double l) { return triple_impl(u, l); }
double triple_norm(const VectorSeries& u, double l) { return triple_impl(u, l); }
double triple_norm_l2(const ScalarSeries& u, double l) { return triple_l2_impl(u, l); }
double triple_norm_l2(const VectorSeries& u, double l) { return triple_l2_impl(u, l); }

double solution_norm(const ScalarSeries& u, double l) {
  const double t = triple_l2_impl(u, l);
  return std::sqrt(t * t + sup_sq(u, l + 1.0));
}

double solution_norm(const VectorSeries& u, double l) {
  const double t = triple_l2_impl(u, l);
  return std::sqrt(t * t + sup_sq(u, l + 1.0));
}

double sup_spatial_norm(const VectorSeries& u, double s) { return std::sqrt(sup_sq(u, s)); }

double l2_space_time(const ScalarSeries& u) { return std::sqrt(l2_space_time_sq(components(u)[0], u.t)); }

double l2_space_time(const VectorSeries& u) {
  double total = 0.0;
  for (const auto& c : components(u)) total += l2_space_time_sq(c, u.t);
  return std::sqrt(total);
}

void NormReport::set(const std::string& name, double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) throw NormError("norm '" + name + "' is negative or non-finite");
  values[name] = value;
}

std::string NormReport::to_json() const {
  nlohmann::ordered_json j;
  j["l"] = l;
  j["gamma"] = gamma;
  j["T"] = T;
  j["grid"] = grid;
  nlohmann::ordered_json v = nlohmann::ordered_json::object();
  for (const auto& [name, value] : values) v[name] = value;
  j["values"] = v;
  return j.dump(2);
}

std::string describe(const Grid& g) {
  std::ostringstream os;
  os << g.nx << "x" << g.ny << "x" << g.nz << " lx=" << g.lx << " ly=" << g.ly << " depth=" << g.depth;
  return os.str();
}

}  // namespace mhdlag
