#pragma once

// Checks a desk-scale run can make: compatibility of the initial data,
// propagation of div H, energy, the small-data continuation step and
// empirical constants of the product and kinematic inequalities.

#include "mhdlag/fixedpoint.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mhdlag {

struct CompatReport {
  std::vector<CompatItem> items;  // div_u0, div_H0, H0_top_trace, tangential_stress

  bool ok() const;
  double residual(const std::string& name) const;
  /// Names of the failing items, comma separated.
  std::string failures() const;
};

/// Max-norm residuals of div u0, div H0, the top trace of H0 and
/// 2 nu Pi D(u0) n0 with Pi = I - n0 n0, each against `tol`.
CompatReport check_compatibility(const VectorField& u0, const VectorField& H0, const SurfaceVectorField& n0,
                                 double tol, double nu = 1.0);

/// Divergence of the magnetic field along a run. The Eulerian divergence of H
/// is div_v B = tr(G grad B) in Lagrangian variables; that is the asserted
/// quantity. The flat divergence is reported alongside.
struct PropagationReport {
  std::vector<double> t;
  std::vector<double> div_inf;         // ||div_v B||_inf
  std::vector<double> div_l2;          // ||div_v B||_L2
  std::vector<double> flat_div_inf;    // ||div B||_inf
  std::vector<double> integrated_inf;  // sup norm of the independently integrated divergence
  std::vector<double> mismatch;        // max |integrated - direct| over interior nodes
  double initial = 0.0;
  double max_value = 0.0;
  double tol_div = 0.0;
  double max_mismatch = 0.0;
  bool bounded = true;         // max_t ||div||_inf <= ||div(0)||_inf + tol_div
  bool nonincreasing = true;   // level to level within tol_div
  int worst_level = 0;
  int worst_i = 0, worst_j = 0, worst_k = 0;
  double worst_time = 0.0;

  bool ok() const { return bounded && nonincreasing; }
};

/// `solver_tol` enters tol_div = 1e-6 max|B| + 10 solver_tol. The divergence
/// is integrated separately from div_v H0 with the transported heat equation
/// h_t = lambda lap_v h (the material derivative in Lagrangian variables),
/// taking its face values from the direct series.
PropagationReport divergence_propagation(const VectorSeries& B, const VectorSeries& v, double lambda,
                                         double solver_tol = 1e-8, double jac_floor = 0.1);

struct EnergyReport {
  std::vector<double> t;
  std::vector<double> energy;  // (||v||^2 + ||B||^2) / 2
  bool asserted = false;       // only without gravity and forcing
  bool nonincreasing = true;
  int first_increase = -1;
};

EnergyReport energy_monitor(const MHDState& state, const IterationConfig& config, bool force_free = true);

/// E(t) = ||v(t)||_{W^{l+1}} + ||B(t)||_{W^{l+1}} + ||h(t)||_{W^{l+3/2}}.
double continuation_energy(const VectorField& v, const VectorField& B, const SurfaceField& h, double l);

struct ContinuationReport {
  std::vector<double> t, E;  // both segments, the restart level once
  double eps0 = 0.0;
  double E0 = 0.0, E_T = 0.0, E_2T = 0.0;
  double c0 = 0.0, c1 = 0.0;        // first segment
  double c0_2 = 0.0, c1_2 = 0.0;    // second segment
  double bound = 0.0;               // (1 + C0 + C0 C1 T*) E(0)
  double bound_2 = 0.0;             // same on [T*, 2T*] from E(T*)
  bool first_converged = false;
  bool bound_holds = false;
  bool small_enough = false;        // bound <= eps0
  bool restart_attempted = false;
  bool restart_converged = false;
  bool second_bound_holds = false;
  double chi1 = 0.0, chi2 = 0.0;
  std::string failure;

  bool ok() const { return small_enough && restart_converged && second_bound_holds; }
};

/// Runs [0, T*] and, when the measured bound is below eps0, restarts from the
/// final state in the same Lagrangian frame on [T*, 2T*].
ContinuationReport continuation_experiment(const VectorField& u0, const VectorField& H0, const SurfaceField& h0,
                                           const IterationConfig& config, double eps0);

struct ProbeConfig {
  Grid grid;          // coarse grid; constants are re-measured on a 2x refinement
  double l = 0.75;
  double T0 = 1e-5;  // windows T0/16 ... T0, inside the small-T regime
  int levels = 9;     // time levels per window
  int trials = 4;
  std::uint64_t seed = 1;
};

struct ConstantProbe {
  std::string name;
  std::vector<double> coarse, fine;  // per-trial ratios
  double constant_coarse = 0.0, constant_fine = 0.0;
  double spread = 0.0;               // max / min of the two constants
  bool ok = true;                    // spread < 2
};

struct SlopeProbe {
  std::string name;
  std::vector<double> T;
  std::vector<std::vector<double>> ratios;  // [trial][window]
  std::vector<double> slopes;               // per trial
  double slope = 0.0;                       // mean of the trial slopes
  double expected = 0.0;
  bool two_sided = true;                    // false: the exponent is only a lower bound
  bool ok = true;                           // |slope - expected| <= 0.1 (one-sided: slope >= expected - 0.1)
};

struct ProbeReport {
  std::uint64_t seed = 0;
  int trials = 0;
  double l = 0.0;
  std::vector<ConstantProbe> constants;
  std::vector<SlopeProbe> slopes;

  bool ok() const;
  std::string to_json() const;
};

/// Band-limited random field: trigonometric modes in the lowest third of the
/// coarse spectrum horizontally and vertically, unit L2 norm. Evaluated from
/// the same coefficients on any grid with the same box.
ScalarField random_band_limited(const Grid& grid, const Grid& spectrum, std::uint64_t seed);

ProbeReport inequality_probes(const ProbeConfig& config);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mhdlag
