#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "turwave/dispersion.hpp"
#include "turwave/models.hpp"

namespace turwave {

struct NewtonError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when Newton collapses onto the constant state.
struct TrivialSolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Uniform periodic collocation grid x_m = (m/M) X, m = 0..M-1.
/// The representation is the trigonometric interpolant; there is no
/// duplicated endpoint.
struct FourierGrid {
  int M = 0;
  double X = 0.0;
  FourierGrid(int M_, double X_) : M(M_), X(X_) {}
  Vector nodes() const;
  /// Dense spectral differentiation matrix (first derivative).
  Matrix diff_matrix() const;
};

/// A periodic traveling wave discretized on a FourierGrid, together with
/// the parameters it was solved at. grid is n x M, column m = u(x_m).
struct PeriodicProfile {
  double X = 0.0;
  double c = 0.0;
  double eps = 0.0;
  Vector q;        // integration constant, fixed 0 in all studies here
  Matrix grid;     // n x M
  Vector phase_w;  // phase-condition vector
  double residual_norm = 0.0;
  std::string system_label;

  int M() const { return static_cast<int>(grid.cols()); }
  int n() const { return static_cast<int>(grid.rows()); }
};

/// max-norm of the oscillatory part u - mean(u)
double oscillation_amplitude(const Matrix& grid);

/// Residual of the profile equation D u' + q - (A(eps) u + N(u) - c u),
/// evaluated columnwise with spectral differentiation. Requires M even >= 16.
Matrix profile_residual(const Matrix& u_grid, double X, double c, double eps,
                        const Vector& q, const SystemSpec& spec);

/// Scaled eigenmode of the linearized profile ODE at the origin:
/// u(x_m) = sqrt(eps_guess) * Re(e^{2 pi i x_m / X} v) / shrink, where v is
/// the eigenvector of D^{-1}(A(eps*) - c* I) whose eigenvalue has nonzero
/// imaginary part. Throws NotHopfError if no complex pair exists.
Matrix initial_guess(const TuringPoint& turing, const SystemSpec& spec, int M, double X,
                     double eps_guess = 1e-2, double shrink = 10.0);

struct NewtonOptions {
  double tol = 1e-10;        // max-norm residual target
  int max_iter = 25;
  double trivial_tol = 1e-6;  // oscillation threshold for trivial-solution rejection
  std::uint64_t w_seed = 12345;
};

/// Newton iteration on the unknowns (u_grid, eps) with (c, X) held fixed,
/// under the scalar phase condition w . f_ode(u(0)) = 0. The phase vector w
/// is drawn from the seeded unit sphere unless supplied; a singular Jacobian
/// triggers one redraw of w and a retry.
PeriodicProfile solve_profile(const Matrix& guess, double X, double c,
                              const SystemSpec& spec, double eps0 = 1e-2,
                              const Vector& q = Vector(),
                              const NewtonOptions& opts = {},
                              const Vector* w_fixed = nullptr);

/// Zero-state carrier used for constant-state spectra; residual is exactly 0.
PeriodicProfile constant_profile(const SystemSpec& spec, double eps, double c,
                                 double X, int M);

struct ContinuationFamily {
  std::vector<double> c_values;
  std::vector<double> X_values;
  std::map<std::pair<int, int>, PeriodicProfile> members;  // (c index, X index)
  TuringPoint provenance;
};

/// Natural-parameter continuation over a rectangular (c, X) grid, each grid
/// point warm-started from a converged neighbor (wavefront order from the
/// grid point nearest the seed). Failed points are left absent.
ContinuationFamily continue_family(const PeriodicProfile& seed, const SystemSpec& spec,
                                   double c_lo, double c_hi, int nc,
                                   double X_lo, double X_hi, int nX,
                                   const NewtonOptions& opts = {});

/// Walks (c, X) along the straight segment from the seed's parameters to the
/// target, halving the step on failure. Throws NewtonError when stalled.
PeriodicProfile continue_to(const PeriodicProfile& seed, const SystemSpec& spec,
                            double c_target, double X_target,
                            double max_step = 0.05, double min_step = 1e-5,
                            const NewtonOptions& opts = {});

/// Marches the nonlinearity homotopy h: 0 -> 1 in h_steps uniform increments
/// at fixed (c, X), starting from a converged quadratic profile. Throws
/// NewtonError naming the failing h on loss of convergence.
PeriodicProfile homotopy_to_cubic(const PeriodicProfile& seed, const SystemSpec& spec,
                                  int h_steps = 10, const NewtonOptions& opts = {});

/// Seeds the branch of opposite criticality from a converged cubic profile
/// via the sign map (beta, c - c*, eps) -> (-beta, -(c - c*), -eps), with the
/// field reflected, then re-solves for the beta-negated system. The map is
/// exact only at the linearized level, so Newton does the rest.
PeriodicProfile subcritical_from_sign_map(const PeriodicProfile& cubic_profile,
                                          const SystemSpec& cubic_spec, double c_star,
                                          const NewtonOptions& opts = {});

/// Self-describing JSON record: system, parameters, phase vector and grid
/// values at full precision.
void save_profile(const std::string& path, const PeriodicProfile& profile,
                  const SystemSpec& spec);

struct LoadedProfile {
  SystemSpec system;
  PeriodicProfile profile;
};

/// Loads a record and, when verify is set, recomputes the residual and
/// throws std::runtime_error if it exceeds 1e-8 (stale or corrupt record).
LoadedProfile load_profile(const std::string& path, bool verify = true);

}  // namespace turwave
