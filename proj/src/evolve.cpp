#include "turwave/evolve.hpp"

#include <cmath>
#include <random>

#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/MatrixFunctions>

namespace turwave {

namespace {

void fft_rows(const Matrix& field, CMatrix& out) {
  Eigen::FFT<double> fft;
  const int n = static_cast<int>(field.rows()), M = static_cast<int>(field.cols());
  out.resize(n, M);
  CVector row(M), hat(M);
  for (int i = 0; i < n; ++i) {
    row = field.row(i).transpose().cast<Complex>();
    fft.fwd(hat, row);
    out.row(i) = hat.transpose() / double(M);
  }
}

void ifft_rows(const CMatrix& hat, Matrix& out) {
  Eigen::FFT<double> fft;
  const int n = static_cast<int>(hat.rows()), M = static_cast<int>(hat.cols());
  out.resize(n, M);
  CVector coeff(M), vals(M);
  for (int i = 0; i < n; ++i) {
    coeff = hat.row(i).transpose() * double(M);
    fft.inv(vals, coeff);
    out.row(i) = vals.real().transpose();
  }
}

int signed_freq(int bin, int M) { return bin <= M / 2 ? bin : bin - M; }

}  // namespace

ImexStepper::ImexStepper(const SystemSpec& spec, double c, double eps, double X, int M,
                         double dt)
    : spec_(spec), X_(X), dt_(dt), M_(M) {
  if (dt <= 0.0 || M < 4 || X <= 0.0)
    throw std::invalid_argument("ImexStepper: need dt > 0, M >= 4, X > 0");
  const Matrix B = evaluate_A(spec, eps) - c * Matrix::Identity(spec.n, spec.n);
  propagator_.resize(M);
  ik_.resize(M);
  const int kmax_dealias = M / 3;  // 2/3 rule
  for (int b = 0; b < M; ++b) {
    const int f = signed_freq(b, M);
    const double k = 2.0 * M_PI * f / X;
    CMatrix S = Complex(0, -k) * B.cast<Complex>() - (k * k) * spec.D.cast<Complex>();
    propagator_[b] = (dt * S).exp();
    const bool keep = std::abs(f) <= kmax_dealias && 2 * std::abs(f) != M;
    ik_[b] = keep ? Complex(0, k) : Complex(0, 0);
  }
}

void ImexStepper::step(Matrix& state) const {
  if (state.rows() != spec_.n || state.cols() != M_)
    throw std::invalid_argument("ImexStepper::step: state shape mismatch");
  CMatrix uhat;
  fft_rows(state, uhat);

  // explicit nonlinear flux divergence -d/dx N(u), dealiased
  if (spec_.nonlin.kind != NonlinKind::none && spec_.beta != 0.0) {
    Vector Nu(M_);
    for (int m = 0; m < M_; ++m) {
      const double u1 = state(0, m);
      Vector um = Vector::Zero(spec_.n);
      um[0] = u1;
      Nu[m] = nonlinear_term(spec_, um)[0];
    }
    Eigen::FFT<double> fft;
    CVector nhat(M_);
    fft.fwd(nhat, CVector(Nu.cast<Complex>()));
    nhat /= double(M_);
    for (int b = 0; b < M_; ++b) uhat(0, b) += dt_ * (-ik_[b] * nhat[b]);
  }

  for (int b = 0; b < M_; ++b)
    uhat.col(b) = propagator_[b] * uhat.col(b);

  ifft_rows(uhat, state);
  if (!state.allFinite()) throw BlowupError("ImexStepper: state is no longer finite");
}

double shift_quotient_norm(const Matrix& state, const Matrix& ref, double X) {
  const int n = static_cast<int>(state.rows()), M = static_cast<int>(state.cols());
  CMatrix uhat, rhat;
  fft_rows(state, uhat);
  fft_rows(ref, rhat);

  // correlation over grid shifts via one inverse transform
  CVector cross = CVector::Zero(M);
  for (int i = 0; i < n; ++i)
    for (int b = 0; b < M; ++b) cross[b] += uhat(i, b) * std::conj(rhat(i, b));
  Eigen::FFT<double> fft;
  CVector corr(M);
  fft.inv(corr, CVector(cross * double(M)));

  int best = 0;
  for (int m = 1; m < M; ++m)
    if (corr[m].real() > corr[best].real()) best = m;
  const double g0 = corr[best].real();
  const double gm = corr[(best - 1 + M) % M].real();
  const double gp = corr[(best + 1) % M].real();
  const double denom = gm - 2.0 * g0 + gp;
  double frac = 0.0;
  if (denom < 0.0) frac = 0.5 * (gm - gp) / denom;
  const double shift = (best + frac) * X / M;

  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int b = 0; b < M; ++b) {
      const double k = 2.0 * M_PI * signed_freq(b, M) / X;
      const Complex diff = uhat(i, b) - rhat(i, b) * std::polar(1.0, -k * shift);
      acc += std::norm(diff);
    }
  return std::sqrt(acc);  // RMS in physical space by Parseval
}

AgreementReport validate_verdict(const PeriodicProfile& profile, const SystemSpec& spec,
                                 const StabilityVerdict& verdict, double pert_amp,
                                 double T, const EvolveOptions& opts) {
  const double wave_amp = oscillation_amplitude(profile.grid);
  if (wave_amp > 0.0 && pert_amp > 1e-3 * wave_amp)
    throw std::invalid_argument("validate_verdict: perturbation too large for the wave");

  const int k = std::max(1, opts.k_periods);
  const int M = profile.M() * k;
  const double X = profile.X * k;
  Matrix ref(profile.n(), M);
  for (int m = 0; m < M; ++m) ref.col(m) = profile.grid.col(m % profile.M());

  // zero-mean random smooth perturbation (low modes with decaying weights);
  // zero mean keeps the conserved masses of the reference wave
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix pert = Matrix::Zero(profile.n(), M);
  const Vector x = FourierGrid(M, X).nodes();
  for (int i = 0; i < profile.n(); ++i)
    for (int kk = 1; kk <= 4; ++kk) {
      const double wa = gauss(rng) * std::exp(-0.5 * kk);
      const double wb = gauss(rng) * std::exp(-0.5 * kk);
      for (int m = 0; m < M; ++m)
        pert(i, m) += wa * std::cos(2.0 * M_PI * kk * x[m] / X) +
                      wb * std::sin(2.0 * M_PI * kk * x[m] / X);
    }
  pert *= pert_amp / pert.cwiseAbs().maxCoeff();

  Matrix state = ref + pert;
  const double dt = opts.dt > 0.0 ? opts.dt : 1e-3 * profile.X;
  ImexStepper stepper(spec, profile.c, profile.eps, X, M, dt);

  AgreementReport rep;
  rep.verdict_stable = verdict.stable;
  rep.initial_amp = shift_quotient_norm(state, ref, X);
  rep.series.t.push_back(0.0);
  rep.series.amp.push_back(rep.initial_amp);

  const int steps = static_cast<int>(std::ceil(T / dt));
  const int sample_every = std::max(1, static_cast<int>(std::round(opts.sample_interval / dt)));
  double amp = rep.initial_amp;
  for (int s = 1; s <= steps; ++s) {
    try {
      stepper.step(state);
    } catch (const BlowupError&) {
      rep.series.blowup = true;
      rep.series.t_blowup = s * dt;
      break;
    }
    if (s % sample_every == 0 || s == steps) {
      amp = shift_quotient_norm(state, ref, X);
      rep.series.t.push_back(s * dt);
      rep.series.amp.push_back(amp);
      if (amp >= opts.growth_ratio * rep.initial_amp) break;   // unstable, stop early
      if (amp <= 0.02 * rep.initial_amp) break;                // decayed decisively
    }
  }
  rep.final_amp = rep.series.amp.back();
  rep.ratio = rep.final_amp / rep.initial_amp;
  if (rep.series.blowup || rep.ratio >= opts.growth_ratio)
    rep.outcome = Outcome::growth;
  else if (rep.ratio <= opts.decay_ratio)
    rep.outcome = Outcome::decay;
  else
    rep.outcome = Outcome::inconclusive;
  rep.agrees = (rep.outcome == Outcome::decay && verdict.stable) ||
               (rep.outcome == Outcome::growth && !verdict.stable);
  return rep;
}

}  // namespace turwave
