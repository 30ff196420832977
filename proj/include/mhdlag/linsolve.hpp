#pragma once

// Linear engines: the Stokes system with stress conditions on the top face,
// the Dirichlet heat system and the Dirichlet Poisson problem.
//
// All three are solved per horizontal wavenumber. The Stokes step
//
//   (v - v_prev) / dt - nu lap_c v + grad q = f,   div v = rho (interior)
//   top:    nu (d_z v_h + grad_h v3) = d_h,   -q + 2 nu d_z v3 = b
//   bottom: v3 = 0 and d_z v_h = 0 (free slip) or v_h = 0 (no slip)
//
// is rotated into the components along and across the horizontal wave
// vector. The across part decouples into a scalar problem; the along part,
// v3 and q form a real banded system after writing v_along = i w. Unknowns are
// interleaved per node as (w, v3, q). Each face node carries its two boundary
// conditions plus the vertical momentum row, and continuity is imposed at the
// interior nodes. With a collocated pressure the centered gradient cannot see
// the odd-even pressure mode; the one-sided momentum rows on both faces fix
// it. Imposing continuity on the top face instead leaves that mode free at
// the top and costs one order of accuracy.

#include "mhdlag/banded.hpp"
#include "mhdlag/fields.hpp"
#include "mhdlag/norms.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace mhdlag {

enum class BottomCondition { free_slip, no_slip };

struct StokesData {
  VectorSeries f;          // forcing at every level (level 0 unused)
  ScalarSeries rho;        // prescribed divergence
  VectorField u0;
  SurfaceSeries b;         // normal stress datum
  std::vector<SurfaceVectorField> d;  // tangential stress datum, horizontal
  SurfaceVectorField n0;   // reference normal (e3)

  /// Zero data on the grid's time levels.
  static StokesData zero(const Grid& grid);
};

struct CompatItem {
  std::string name;
  double residual = 0.0;
  bool ok = true;
};

struct StokesSolution {
  VectorSeries v;
  ScalarSeries q;
  SurfaceSeries q_surface;
  std::vector<CompatItem> compat;
  bool flagged = false;  // compatibility violated beyond tolerance
  std::vector<std::string> warnings;
};

/// One implicit Euler step of the Stokes system, factored once per |k|^2.
class StokesStepper {
 public:
  StokesStepper(const Grid& grid, double nu, double dt, BottomCondition bottom = BottomCondition::free_slip);

  struct Result {
    VectorField v;
    ScalarField q;
  };

  /// `d` holds the horizontal tangential stress components (d[2] ignored).
  Result step(const VectorField& v_prev, const VectorField& f, const ScalarField& rho, const SurfaceField& b,
              const SurfaceVectorField& d, int step_index = 0) const;

  const Grid& grid() const { return grid_; }
  double nu() const { return nu_; }
  double dt() const { return dt_; }
  BottomCondition bottom() const { return bottom_; }

 private:
  struct Factor;
  Grid grid_;
  double nu_, dt_;
  BottomCondition bottom_;
  std::map<double, std::shared_ptr<const Factor>> factors_;
  std::vector<const Factor*> by_mode_;
};

/// Residuals of div u0 = rho(0) (interior nodes), d(0) = 2 nu Pi0 D(u0) n0
/// and d . n0 = 0 (max over the face and all levels), each against `tol`.
std::vector<CompatItem> stokes_compatibility(const StokesData& data, double nu, double tol);

/// Implicit Euler over the levels of data.f; the time step is the spacing of
/// data.f.t. Compatibility residuals at t = 0 are checked against tol_compat
/// and reported (a violation flags the solution, it does not abort).
StokesSolution solve_stokes(const StokesData& data, double nu, BottomCondition bottom = BottomCondition::free_slip,
                            double tol_compat = 1e-8);

/// Relative residuals of one Stokes step, re-evaluated with the field
/// operators. Momentum and continuity rows are checked at interior nodes,
/// both stress rows on the top face.
struct StokesResiduals {
  double momentum = 0.0;
  double continuity = 0.0;
  double tangential = 0.0;
  double normal = 0.0;
  double max() const { return std::max({momentum, continuity, tangential, normal}); }
};
StokesResiduals stokes_step_residuals(const VectorField& v_prev, const VectorField& v, const ScalarField& q,
                                      const VectorField& f, const ScalarField& rho, const SurfaceField& b,
                                      const SurfaceVectorField& d, double nu, double dt);

/// Implicit Euler propagator for B_t - lambda lap_c B = g with B = 0 on the
/// top and bottom faces.
class HeatStepper {
 public:
  HeatStepper(const Grid& grid, double lambda, double dt);
  /// E (b_prev + dt g).
  ScalarField step(const ScalarField& b_prev, const ScalarField& g) const;
  VectorField step(const VectorField& b_prev, const VectorField& g) const;
  /// E x, the one-step propagator applied to x (face values forced to 0).
  ScalarField propagate(const ScalarField& x) const;
  VectorField propagate(const VectorField& x) const;

  const Grid& grid() const { return grid_; }

 private:
  Grid grid_;
  double lambda_, dt_;
  std::map<double, std::shared_ptr<const BandedLU>> factors_;
  std::vector<const BandedLU*> by_mode_;
};

struct HeatSolution {
  VectorSeries B;
  std::vector<std::string> warnings;
};

/// Componentwise implicit Euler with source levels gsrc.u[n] (level 0 unused)
/// on the time stamps of gsrc.
HeatSolution solve_heat_dirichlet(const VectorSeries& gsrc, const VectorField& H0, double lambda);

/// Discrete Duhamel sum B^n = E^n H0 + dt sum_{j=1}^n E^{n-j+1} g^j. Equal to
/// the stepped solution up to rounding.
VectorSeries heat_duhamel(const VectorSeries& gsrc, const VectorField& H0, double lambda);

/// div grad phi = rho at interior nodes, phi = 0 on the top and bottom faces.
/// Uses the same (wide) vertical stencil as laplacian(), so
/// divergence(gradient(phi)) reproduces rho at interior nodes.
ScalarField solve_poisson_dirichlet(const ScalarField& rho);

}  // namespace mhdlag
