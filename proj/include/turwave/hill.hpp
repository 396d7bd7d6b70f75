#pragma once

#include <string>
#include <vector>

#include "turwave/models.hpp"
#include "turwave/profile.hpp"

namespace turwave {

/// Fourier data of the linearization about a periodic profile in the
/// co-moving frame,
///   v_t = D v'' - [(A(eps) - cI + dN(u(x))) v]',
/// expanded per product rule into coefficient functions of derivative
/// orders 2, 1, 0. Coefficients are stored as matrix-valued Fourier data
/// phi_k for k = -n_coeff .. n_coeff.
struct BlochOperator {
  int n = 0;
  double X = 0.0;
  double c = 0.0;
  double eps = 0.0;
  int n_modes = 0;   // truncation N: kept Fourier modes are -N..N per field
  int n_coeff = 0;   // stored coefficient modes
  Matrix second_order;              // constant coefficient of v'' (the viscosity)
  std::vector<CMatrix> first_order; // size 2*n_coeff+1, index k + n_coeff
  std::vector<CMatrix> zeroth_order;

  const CMatrix& phi1(int k) const { return first_order[k + n_coeff]; }
  const CMatrix& phi0(int k) const { return zeroth_order[k + n_coeff]; }
};

/// Builds the Bloch operator for a converged profile. Coefficient samples
/// are taken on a refined grid (exact trigonometric upsampling of the
/// profile) so that products like dN(u(x)) stay alias-free, then transformed
/// by FFT.
BlochOperator linearize_about(const PeriodicProfile& profile, const SystemSpec& spec,
                              int n_modes = 20);

/// Dense truncation of the Bloch eigenvalue problem at Floquet exponent xi:
/// the (j,l) mode block is sum_q phi_{j-l,q} (i(xi + 2 pi l / X))^q, of total
/// size n(2N+1). Requires |xi| <= pi/X (first Brillouin zone).
CMatrix build_hill_matrix(const BlochOperator& op, double xi);

struct SpectrumSample {
  double xi = 0.0;
  CVector eigenvalues;  // length n(2N+1), library ordering
};

/// Eigensolves build_hill_matrix at n_floquet equispaced xi spanning
/// [-pi/X, pi/X]. n_floquet must be odd so xi = 0 is sampled. Eigensolves
/// run on `workers` threads (0 = hardware concurrency).
std::vector<SpectrumSample> compute_spectrum(const BlochOperator& op,
                                             int n_floquet = 101, int workers = 0);

struct WhithamBranch {
  Complex a;  // lambda(xi) = -i a xi - b xi^2 + O(xi^3)
  Complex b;
  std::vector<double> path_xi;
  std::vector<Complex> path;
};

struct WhithamFit {
  std::vector<WhithamBranch> branches;  // the n+1 curves through the origin
  int curves_through_origin = 0;        // eigenvalues at xi=0 within origin_tol
  Complex fifth_origin;                 // lambda(0) of the nearest non-neutral branch
  double fifth_max_re = 0.0;            // max Re along the tracked fifth branch
  std::vector<double> fifth_path_xi;
  std::vector<Complex> fifth_path;
  double fit_radius = 0.0;
  double max_jump_ratio = 0.0;          // tracking diagnostic
};

/// Tracks the n_branches eigenvalue curves through the origin (plus the one
/// passing nearby) by nearest-continuation in xi and least-squares fits
/// lambda_j(xi) = -i a_j xi - b_j xi^2 over |xi| <= fit_radius. Throws
/// std::runtime_error if fewer than n_branches eigenvalues sit within
/// origin_tol of 0 at xi = 0.
WhithamFit fit_whitham_curves(const std::vector<SpectrumSample>& samples,
                              double fit_radius, int n_branches,
                              double origin_tol = 1e-6);

struct HillSettings {
  int n_floquet = 101;
  int n_modes = 20;          // 2N+1 = 41 Fourier modes
  double r0 = 1e-2;          // origin-ball radius separating neutral curves
  double tol_stab = 1e-6;
  double tol_hyp = 1e-4;     // |Im a_j| bound (hyperbolicity)
  double tol_curv = 1e-6;    // Re b_j >= -tol_curv (parabolicity)
  double fit_radius = 0.0;   // 0 = auto (8 Floquet steps, clamped to the zone)
  int workers = 0;
};

struct StabilityVerdict {
  bool stable = false;
  double max_re_outside = 0.0;  // max Re lambda over samples with |lambda| > r0
  std::vector<std::pair<Complex, Complex>> whitham;  // (a_j, b_j)
  int curve_count_near_origin = 0;
  Complex fifth_origin;
  double fifth_max_re = 0.0;
  std::string diagnostics;
};

/// Diffusive spectral stability: (i) no spectrum with positive real part
/// outside the origin ball, (ii) real Whitham speeds a_j, (iii) nonnegative
/// curvatures Re b_j, (iv) the nearby fifth curve confined to Re <= tol_stab.
StabilityVerdict classify(const std::vector<SpectrumSample>& samples,
                          const WhithamFit& fit, const HillSettings& settings = {});

/// linearize -> compute_spectrum -> fit -> classify, with one half-step
/// refinement of the fit window when branch tracking reports jumpy matches.
StabilityVerdict classify_profile(const PeriodicProfile& profile, const SystemSpec& spec,
                                  const HillSettings& settings = {});

/// Same pipeline but returns the samples too (for dumps and plots).
struct SpectrumRun {
  std::vector<SpectrumSample> samples;
  WhithamFit fit;
  StabilityVerdict verdict;
};
SpectrumRun run_hill(const PeriodicProfile& profile, const SystemSpec& spec,
                     const HillSettings& settings = {});

}  // namespace turwave
