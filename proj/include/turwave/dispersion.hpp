#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "turwave/linalg.hpp"
#include "turwave/models.hpp"

namespace turwave {

/// Thrown when a scan or bisection cannot bracket the feature it is after.
struct BracketError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when the neutral eigenvalue at the located crossing has zero
/// imaginary part, so the crossing is not of Hopf type.
struct NotHopfError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SymbolSample {
  double xi = 0.0;
  CVector eigenvalues;  // spectrum of -i xi A - xi^2 D, library ordering
};

/// Location of a finite-wavenumber neutral crossing of the constant state.
struct TuringPoint {
  double eps_star = 0.0;  // parameter value at onset
  double xi_star = 0.0;   // critical wavenumber, > 0
  double tau = 0.0;       // |Im| of the neutral eigenvalue at xi_star
  double c_star = 0.0;    // wave speed tau / xi_star
  double X_star = 0.0;    // period 2*pi / xi_star
};

/// Structural conditions on (A, D): A diagonal with distinct entries,
/// D with positive diagonal and spectrum in the open right half-plane.
struct CondReport {
  bool strictly_hyperbolic = false;
  bool positive_diagonal = false;
  bool D_spectrum_unstable = false;  // all eigenvalues of D have Re > 0
  double min_gap = 0.0;              // smallest |a_i - a_j|, i != j
  double min_D_diagonal = 0.0;
  double min_D_spectrum_re = 0.0;
  bool passes() const { return strictly_hyperbolic && positive_diagonal && D_spectrum_unstable; }
};

struct GrowthResult {
  double xi_at_max = 0.0;
  double growth = 0.0;  // Re-spectral abscissa of the symbol at xi_at_max
};

/// -i xi A - xi^2 D
CMatrix symbol_matrix(const Matrix& A, const Matrix& D, double xi);
SymbolSample sample_symbol(const Matrix& A, const Matrix& D, double xi);

CondReport check_cond(const Matrix& A, const Matrix& D, double tol_distinct = 1e-8);

/// Maximizes the Re-spectral abscissa of the symbol over a grid on
/// (0, xi_max], refining interior maxima by golden section to 1e-10 in xi.
/// Boundary maxima at the small end are returned unrefined (the abscissa
/// approaches 0 from below as xi -> 0 for stable states). Throws
/// BracketError if the abscissa is still increasing at xi_max.
GrowthResult max_growth(const Matrix& A, const Matrix& D,
                        double xi_max = 10.0, int grid_points = 2000);

/// Spectrum of D^{-1} (A - c I). Throws std::invalid_argument if D is singular.
CVector hopf_eigenvalues(const Matrix& A, const Matrix& D, double c);

/// Bisects eps over [eps_lo, eps_hi] for the sign change of max_growth and
/// extracts the critical wavenumber, frequency and co-moving speed there.
TuringPoint find_turing_point(const SystemSpec& spec, double eps_lo, double eps_hi,
                              double eps_tol = 1e-12, double xi_max = 10.0,
                              int grid_points = 2000);

/// Marches the viscosity homotopy D(s) = s*D_check + (1-s)*I from s=0 to 1,
/// locating by bisection the first s at which max_growth crosses zero with A
/// held fixed. The crossing wavenumber generally differs from any seed value.
TuringPoint homotopy_D_search(const Matrix& A, const Matrix& D_check, int steps = 50,
                              double xi_max = 10.0, int grid_points = 2000);

/// Randomized check that 2x2 systems satisfying the structural conditions
/// never produce a finite-wavenumber neutral pair. Every 4th sample uses a
/// symmetric D, exercising the symmetrizable case separately.
struct TwoByTwoReport {
  int samples = 0;
  int violations = 0;
  int symmetric_samples = 0;
  int symmetric_violations = 0;
};
TwoByTwoReport assert_no_2x2_turing(int samples, std::uint64_t rng_seed);

/// For A symmetric and D + D^T positive definite, D^{-1}A cannot have a
/// nonzero pure-imaginary eigenvalue. Returns true when that holds; throws
/// std::invalid_argument if the hypotheses fail numerically.
bool assert_symmetrizable_obstruction(const Matrix& A, const Matrix& D, double tol = 1e-8);

/// Cluster of coincident diagonal entries of A together with the reduced
/// viscosity block governing the small-xi expansion of those modes.
struct CoincidentBlock {
  std::vector<int> indices;
  Matrix reduced_D;
  CVector reduced_D_eigenvalues;
  double det = 0.0;
  bool unstable = false;  // some eigenvalue of the reduced block has Re <= 0
};
std::vector<CoincidentBlock> coincident_mode_blocks(const Matrix& A, const Matrix& D,
                                                    double tol = 1e-8);

}  // namespace turwave
