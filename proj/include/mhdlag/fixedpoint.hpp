#pragma once

// Successive approximations for the Lagrangian MHD system.
//
// The constant-coefficient loop alternates a Stokes solve forced by (B.grad)B
// and a heat solve forced by (B.grad)v. The full loop keeps the flat
// reference domain on the left-hand side and moves every variable-coefficient
// difference to the data:
//
//   f = nu (lap_m - lap) v + (grad - grad_m) q + (B.grad_m) B
//   g = lambda (lap_m - lap) B + (B.grad_m) v
//   rho = (div - div_m) v
//   b = 2 nu [D(v) n0.n0 - D_m(v) n.n] - g_grav h
//   d = 2 nu [Pi0 D(v) n0 - Pi_n D_m(v) n]
//
// where _m uses the cotangent matrix of the current iterate's flow map and
// n = G n0 / |G n0|. Both Laplacian differences are formed with the wide
// operator, so they vanish identically when G = I.

#include "mhdlag/lagrangian.hpp"
#include "mhdlag/linsolve.hpp"
#include "mhdlag/norms.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace mhdlag {

/// Positive root of 6 d^2 + 6 d - 1 = 0.
double smallness_threshold();

struct IterationConfig {
  double l = 0.75;
  double nu = 1.0;
  double lambda = 1.0;
  double g_grav = 1.0;
  double gamma = 0.0;
  double T = 0.1;
  double dt = 1e-3;
  int max_iters = 30;
  double contraction_tol = 1e-8;
  double delta = 0.1;
  double jac_floor = 0.1;
  double tol_compat = 1e-8;
  int norm_stride = 1;
  BottomCondition bottom = BottomCondition::free_slip;

  /// Number of time levels including t = 0.
  int levels() const;
  /// Throws ConfigError naming the offending field.
  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when successive differences stop shrinking.
class NonContractionError : public std::runtime_error {
 public:
  NonContractionError(const std::string& msg, double chi, int iterate)
      : std::runtime_error(msg), chi_(chi), iterate_(iterate) {}
  double chi() const { return chi_; }
  int iterate() const { return iterate_; }

 private:
  double chi_;
  int iterate_;
};

struct MHDState {
  VectorSeries v;
  VectorSeries B;
  ScalarSeries q;
  SurfaceSeries q_surface;
  SurfaceSeries h;
  std::vector<DeformationState> deformation;
  int iterate = 0;

  /// All-zero state with the time levels of `config` and a flat surface.
  static MHDState zero(const Grid& grid, const IterationConfig& config);
};

struct IterationTrace {
  std::vector<double> Z;        // norm of iterate m (m = 1, 2, ...)
  std::vector<double> Y;        // norm of iterate m minus iterate m-1
  std::vector<double> ratios;   // Y[m+1] / Y[m]
  std::vector<double> B_sup;    // max |B| over all levels of iterate m
  std::vector<double> seconds;  // wall clock per iterate, not written to artifacts
  bool converged = false;

  /// Largest ratio Y_{m+1}/Y_m over m >= 2, or 0 when fewer are available.
  double chi() const;
};

struct SmallnessResult {
  bool ok = false;
  double value = 0.0;
  double margin = 0.0;
};

/// T^{1/2} ||v||^(l+2) against config.delta.
SmallnessResult check_smallness(const VectorSeries& v, const IterationConfig& config);

/// Theorem-style norm combination used for Z and Y.
double iterate_norm(const VectorSeries& v, const VectorSeries& B, const ScalarSeries& q, const SurfaceSeries& q_surface,
                    const IterationConfig& config);

struct ConstantCoefficientData {
  VectorSeries f;
  VectorSeries g;
  ScalarSeries rho;
  SurfaceSeries b;
  std::vector<SurfaceVectorField> d;
  VectorField u0;
  VectorField H0;

  static ConstantCoefficientData zero(const Grid& grid, const IterationConfig& config);
};

struct IterationResult {
  MHDState state;
  IterationTrace trace;
  std::vector<std::string> warnings;
};

IterationResult picard_constant_coefficient(const ConstantCoefficientData& data, const IterationConfig& config);

struct CorrectionTerms {
  VectorSeries f;
  VectorSeries g;
  ScalarSeries rho;
  VectorSeries R;  // (I - G) v, reported only
  SurfaceSeries b;
  std::vector<SurfaceVectorField> d;
};

/// Right-hand sides for the next iterate of the starred unknowns: full-state
/// data of the iterate minus the data already carried by `base`. The base's
/// own surface datum -g_grav h is not included.
CorrectionTerms build_correction_terms(const MHDState& state_m, const MHDState& base, const IterationConfig& config);

/// One explicit Euler step of h_t = v_top . (-dx h, -dy h, 1).
SurfaceField update_surface(const SurfaceField& h, const VectorField& v, double dt);

/// h at every level from h0 and a velocity series.
SurfaceSeries surface_history(const SurfaceField& h0, const VectorSeries& v);

struct FullSolverResult {
  MHDState state;
  MHDState base;
  IterationTrace trace;
  SmallnessResult smallness;  // gate evaluated on the first iterate
  std::vector<std::string> warnings;
};

/// `initial` continues the flow map of an earlier segment (identity when
/// null); compatibility of u0 is then checked in the transformed metric.
FullSolverResult picard_full_nonlinear(const VectorField& u0, const VectorField& H0, const SurfaceField& h0,
                                       const IterationConfig& config, const DeformationState* initial = nullptr);

struct FullRun {
  FullSolverResult result;
  NormReport report;
  double lhs = 0.0;
  double rhs = 0.0;
  double c0 = 0.0;
};

/// picard_full_nonlinear plus the solution and data norms and their ratio.
FullRun run_full_solver(const VectorField& u0, const VectorField& H0, const SurfaceField& h0,
                        const IterationConfig& config, const DeformationState* initial = nullptr);

/// Relative residuals of the Lagrangian system evaluated on a state with the
/// field and lagrangian operators (interior nodes for the volume rows, top
/// face for the stress rows, both faces for B = 0).
struct SystemResiduals {
  double momentum = 0.0;
  double induction = 0.0;
  double continuity = 0.0;
  double normal_stress = 0.0;
  double tangential_stress = 0.0;
  double magnetic_boundary = 0.0;
  double max() const;
};

/// Uses state.deformation when it covers every level.
SystemResiduals system_residuals(const MHDState& state, const IterationConfig& config);

}  // namespace mhdlag
