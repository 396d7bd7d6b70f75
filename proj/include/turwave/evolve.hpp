#pragma once

#include <cstdint>
#include <vector>

#include "turwave/hill.hpp"
#include "turwave/models.hpp"
#include "turwave/profile.hpp"

namespace turwave {

struct BlowupError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// First-order IMEX step for u_t + ((A(eps) - cI) u + N(u))_x = D u_xx on an
/// X-periodic grid: the linear symbol is integrated exactly in Fourier space
/// per mode, the nonlinear flux divergence -d/dx N(u) enters explicitly and
/// is dealiased by the 2/3 rule.
class ImexStepper {
 public:
  ImexStepper(const SystemSpec& spec, double c, double eps, double X, int M, double dt);

  /// Advances the n x M state by dt in place. Throws BlowupError on NaN or
  /// overflow.
  void step(Matrix& state) const;

  double dt() const { return dt_; }
  int M() const { return M_; }
  double X() const { return X_; }

 private:
  SystemSpec spec_;
  double X_ = 0.0;
  double dt_ = 0.0;
  int M_ = 0;
  std::vector<CMatrix> propagator_;  // e^{dt S(k)} per Fourier bin
  std::vector<Complex> ik_;          // i * wavenumber per bin, dealiased
};

struct EvolutionRun {
  std::vector<double> t;
  std::vector<double> amp;  // translation-quotiented perturbation norm
  bool blowup = false;
  double t_blowup = 0.0;
};

enum class Outcome { decay, growth, inconclusive };

struct AgreementReport {
  Outcome outcome = Outcome::inconclusive;
  bool agrees = false;        // outcome matches the spectral verdict
  bool verdict_stable = false;
  double initial_amp = 0.0;
  double final_amp = 0.0;
  double ratio = 0.0;         // final / initial
  EvolutionRun series;
};

struct EvolveOptions {
  double dt = 0.0;          // 0 = 1e-3 * X
  int k_periods = 1;        // domain length k * X (tests a Floquet subgrid)
  std::uint64_t seed = 777;
  double sample_interval = 1.0;
  double decay_ratio = 0.5;
  double growth_ratio = 10.0;
};

/// L2 distance between state and the best continuous translate of ref
/// (cross-correlation fit with parabolic refinement). Both are n x M fields
/// on the same X-periodic grid.
double shift_quotient_norm(const Matrix& state, const Matrix& ref, double X);

/// Integrates profile + small zero-mean random smooth perturbation to time T
/// in the co-moving frame and reports whether the quotiented perturbation
/// norm decays below decay_ratio or grows past growth_ratio of its initial
/// value. On a single period only co-periodic perturbations are tested.
AgreementReport validate_verdict(const PeriodicProfile& profile, const SystemSpec& spec,
                                 const StabilityVerdict& verdict, double pert_amp,
                                 double T, const EvolveOptions& opts = {});

}  // namespace turwave
