#include "turwave/hill.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <thread>

#include <unsupported/Eigen/FFT>

namespace turwave {

namespace {

// DFT coefficients c_b = (1/M) sum_m u_m e^{-2 pi i b m / M}
CVector dft_coeffs(const CVector& samples) {
  Eigen::FFT<double> fft;
  CVector out(samples.size());
  fft.fwd(out, samples);
  return out / double(samples.size());
}

int next_pow2(int v) {
  int p = 1;
  while (p < v) p <<= 1;
  return p;
}

// Exact trigonometric upsampling of one real field row from M to Mf points.
Vector resample(const Vector& values, int Mf) {
  const int M = static_cast<int>(values.size());
  CVector c = dft_coeffs(values.cast<Complex>());
  CVector cf = CVector::Zero(Mf);
  for (int b = 0; b < M; ++b) {
    int k = (b <= M / 2) ? b : b - M;
    if (2 * k == M) {  // split the Nyquist bin
      cf[(k % Mf + Mf) % Mf] += 0.5 * c[b];
      cf[((-k) % Mf + Mf) % Mf] += 0.5 * c[b];
    } else {
      cf[(k % Mf + Mf) % Mf] += c[b];
    }
  }
  Eigen::FFT<double> fft;
  CVector vals(Mf);
  fft.inv(vals, CVector(cf * double(Mf)));
  return vals.real();
}

}  // namespace

BlochOperator linearize_about(const PeriodicProfile& profile, const SystemSpec& spec,
                              int n_modes) {
  if (profile.n() != spec.n)
    throw std::invalid_argument("linearize_about: profile/spec dimension mismatch");
  if (n_modes < 1) throw std::invalid_argument("linearize_about: n_modes must be >= 1");

  BlochOperator op;
  op.n = spec.n;
  op.X = profile.X;
  op.c = profile.c;
  op.eps = profile.eps;
  op.n_modes = n_modes;
  op.second_order = spec.D;

  // fine grid: alias-free for dN(u(x)) (polynomial degree <= 2 in u1) and
  // wide enough for coefficient modes up to 2N
  const int Mf = next_pow2(std::max(4 * profile.M(), 4 * n_modes + 8));
  const Vector u1f = resample(profile.grid.row(0).transpose(), Mf);
  CVector g(Mf);
  for (int m = 0; m < Mf; ++m) g[m] = nonlinear_term_derivative(spec, u1f[m]);
  const CVector ghat = dft_coeffs(g);

  const int K = 2 * n_modes;
  op.n_coeff = K;
  const Matrix B0 = evaluate_A(spec, profile.eps) - profile.c * Matrix::Identity(spec.n, spec.n);
  op.first_order.assign(2 * K + 1, CMatrix::Zero(spec.n, spec.n));
  op.zeroth_order.assign(2 * K + 1, CMatrix::Zero(spec.n, spec.n));
  for (int k = -K; k <= K; ++k) {
    const Complex gk = ghat[(k % Mf + Mf) % Mf];
    CMatrix p1 = CMatrix::Zero(spec.n, spec.n);
    p1(0, 0) = -gk;
    if (k == 0) p1 -= B0.cast<Complex>();
    op.first_order[k + K] = p1;
    CMatrix p0 = CMatrix::Zero(spec.n, spec.n);
    p0(0, 0) = -Complex(0, 2.0 * M_PI * k / profile.X) * gk;  // -(dN(u))'
    op.zeroth_order[k + K] = p0;
  }
  return op;
}

CMatrix build_hill_matrix(const BlochOperator& op, double xi) {
  const double zone = M_PI / op.X;
  if (std::abs(xi) > zone * (1.0 + 1e-12))
    throw std::invalid_argument("build_hill_matrix: xi outside the first Brillouin zone");
  const int N = op.n_modes, n = op.n;
  const int nb = 2 * N + 1;
  CMatrix H = CMatrix::Zero(n * nb, n * nb);
  const CMatrix D2 = op.second_order.cast<Complex>();
  for (int l = -N; l <= N; ++l) {
    const Complex iw(0.0, xi + 2.0 * M_PI * l / op.X);
    const CMatrix col_d2 = (iw * iw) * D2;
    for (int j = -N; j <= N; ++j) {
      const int k = j - l;
      CMatrix blk = op.phi1(k) * iw + op.phi0(k);
      if (j == l) blk += col_d2;
      H.block((j + N) * n, (l + N) * n, n, n) = blk;
    }
  }
  return H;
}

std::vector<SpectrumSample> compute_spectrum(const BlochOperator& op, int n_floquet,
                                             int workers) {
  if (n_floquet < 1 || n_floquet % 2 == 0)
    throw std::invalid_argument("compute_spectrum: n_floquet must be odd");
  const double zone = M_PI / op.X;
  std::vector<double> xis(n_floquet);
  for (int i = 0; i < n_floquet; ++i)
    xis[i] = n_floquet == 1 ? 0.0 : -zone + 2.0 * zone * double(i) / (n_floquet - 1);
  xis[(n_floquet - 1) / 2] = 0.0;  // exact center

  std::vector<SpectrumSample> out(n_floquet);
  int nw = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  nw = std::max(1, std::min(nw, n_floquet));
  std::vector<std::future<void>> jobs;
  for (int t = 0; t < nw; ++t) {
    jobs.push_back(std::async(std::launch::async, [&, t]() {
      for (int i = t; i < n_floquet; i += nw)
        out[i] = {xis[i], eigenvalues(build_hill_matrix(op, xis[i]))};
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

namespace {

struct Tracker {
  std::vector<std::vector<Complex>> paths;   // per branch
  std::vector<std::vector<double>> path_xi;
  double max_jump = 0.0;
  std::vector<double> jumps;
};

// Continue `nb` branches outward from the xi=0 sample by linear prediction
// and greedy closest assignment.
Tracker track_branches(const std::vector<const SpectrumSample*>& ordered, int i0, int nb,
                       const std::vector<int>& seed_idx, double fit_radius, double r0) {
  Tracker tr;
  tr.paths.resize(nb);
  tr.path_xi.resize(nb);
  for (int j = 0; j < nb; ++j) {
    tr.paths[j].push_back(ordered[i0]->eigenvalues[seed_idx[j]]);
    tr.path_xi[j].push_back(ordered[i0]->xi);
  }
  for (int dir : {+1, -1}) {
    std::vector<Complex> prev(nb), prev2(nb);
    std::vector<bool> has2(nb, false);
    for (int j = 0; j < nb; ++j) prev[j] = ordered[i0]->eigenvalues[seed_idx[j]];
    for (int i = i0 + dir; i >= 0 && i < static_cast<int>(ordered.size()); i += dir) {
      const double xi = ordered[i]->xi;
      // continue the companion branch a little past the fit window so the
      // near-origin curve is watched until it leaves the origin ball
      const bool inside = std::abs(xi) <= fit_radius * (1.0 + 1e-12);
      const bool fifth_watch = std::abs(prev[nb - 1]) <= 3.0 * r0;
      if (!inside && !fifth_watch) break;
      const CVector& evs = ordered[i]->eigenvalues;
      std::vector<Complex> pred(nb);
      for (int j = 0; j < nb; ++j)
        pred[j] = has2[j] ? (2.0 * prev[j] - prev2[j]) : prev[j];
      // greedy globally-closest assignment
      std::vector<std::tuple<double, int, int>> dist;
      dist.reserve(nb * evs.size());
      for (int j = 0; j < nb; ++j)
        for (int k = 0; k < evs.size(); ++k)
          dist.emplace_back(std::abs(evs[k] - pred[j]), j, k);
      std::sort(dist.begin(), dist.end(),
                [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
      std::vector<int> pick(nb, -1);
      std::vector<bool> used(evs.size(), false);
      int assigned = 0;
      for (const auto& [d, j, k] : dist) {
        if (pick[j] >= 0 || used[k]) continue;
        pick[j] = k;
        used[k] = true;
        if (++assigned == nb) break;
      }
      for (int j = 0; j < nb; ++j) {
        const Complex v = evs[pick[j]];
        tr.jumps.push_back(std::abs(v - prev[j]));
        prev2[j] = prev[j];
        has2[j] = true;
        prev[j] = v;
        if (inside || j == nb - 1) {
          if (dir > 0) {
            tr.paths[j].push_back(v);
            tr.path_xi[j].push_back(xi);
          } else {
            tr.paths[j].insert(tr.paths[j].begin(), v);
            tr.path_xi[j].insert(tr.path_xi[j].begin(), xi);
          }
        }
      }
    }
  }
  if (!tr.jumps.empty()) {
    std::vector<double> s = tr.jumps;
    std::nth_element(s.begin(), s.begin() + s.size() / 2, s.end());
    const double med = std::max(s[s.size() / 2], 1e-300);
    tr.max_jump = *std::max_element(tr.jumps.begin(), tr.jumps.end()) / med;
  }
  return tr;
}

}  // namespace

WhithamFit fit_whitham_curves(const std::vector<SpectrumSample>& samples,
                              double fit_radius, int n_branches, double origin_tol) {
  if (fit_radius <= 0.0) throw std::invalid_argument("fit_whitham_curves: fit_radius <= 0");
  std::vector<const SpectrumSample*> ordered;
  for (const auto& s : samples) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const SpectrumSample* a, const SpectrumSample* b) { return a->xi < b->xi; });
  int i0 = -1;
  for (int i = 0; i < static_cast<int>(ordered.size()); ++i)
    if (ordered[i]->xi == 0.0) i0 = i;
  if (i0 < 0) throw std::invalid_argument("fit_whitham_curves: samples must include xi = 0");

  const CVector& ev0 = ordered[i0]->eigenvalues;
  std::vector<int> idx(ev0.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return std::abs(ev0[a]) < std::abs(ev0[b]); });

  int through = 0;
  while (through < static_cast<int>(idx.size()) &&
         std::abs(ev0[idx[through]]) <= origin_tol)
    ++through;
  if (through < n_branches)
    throw std::runtime_error(
        "fit_whitham_curves: only " + std::to_string(through) + " of " +
        std::to_string(n_branches) +
        " expected branches pass through the origin (profile nearly constant or "
        "tracking failure)");

  const int nb = std::min<int>(n_branches + 1, static_cast<int>(idx.size()));
  std::vector<int> seed(idx.begin(), idx.begin() + nb);
  Tracker tr = track_branches(ordered, i0, nb, seed, fit_radius, 1e-2);

  WhithamFit fit;
  fit.fit_radius = fit_radius;
  fit.curves_through_origin = through;
  fit.max_jump_ratio = tr.max_jump;
  for (int j = 0; j < n_branches; ++j) {
    WhithamBranch br;
    br.path_xi = tr.path_xi[j];
    br.path = tr.paths[j];
    // least squares for lambda = p xi + q xi^2 (2x2 real normal equations)
    double s2 = 0, s3 = 0, s4 = 0;
    Complex r1(0, 0), r2(0, 0);
    for (size_t m = 0; m < br.path.size(); ++m) {
      const double x = br.path_xi[m];
      if (std::abs(x) > fit_radius * (1.0 + 1e-12)) continue;
      s2 += x * x;
      s3 += x * x * x;
      s4 += x * x * x * x;
      r1 += x * br.path[m];
      r2 += x * x * br.path[m];
    }
    const double det = s2 * s4 - s3 * s3;
    if (det <= 0.0 || s2 == 0.0)
      throw std::runtime_error("fit_whitham_curves: degenerate fit window");
    const Complex p = (s4 * r1 - s3 * r2) / det;
    const Complex q = (s2 * r2 - s3 * r1) / det;
    br.a = Complex(0, 1) * p;  // lambda = -i a xi - b xi^2
    br.b = -q;
    fit.branches.push_back(std::move(br));
  }
  if (nb > n_branches) {
    fit.fifth_origin = ev0[seed[nb - 1]];
    fit.fifth_path_xi = tr.path_xi[nb - 1];
    fit.fifth_path = tr.paths[nb - 1];
    fit.fifth_max_re = -std::numeric_limits<double>::infinity();
    for (const Complex& v : tr.paths[nb - 1])
      fit.fifth_max_re = std::max(fit.fifth_max_re, v.real());
  }
  return fit;
}

StabilityVerdict classify(const std::vector<SpectrumSample>& samples,
                          const WhithamFit& fit, const HillSettings& settings) {
  StabilityVerdict v;
  v.max_re_outside = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples)
    for (int k = 0; k < s.eigenvalues.size(); ++k)
      if (std::abs(s.eigenvalues[k]) > settings.r0)
        v.max_re_outside = std::max(v.max_re_outside, s.eigenvalues[k].real());

  v.curve_count_near_origin = fit.curves_through_origin;
  v.fifth_origin = fit.fifth_origin;
  v.fifth_max_re = fit.fifth_max_re;
  for (const auto& br : fit.branches) v.whitham.emplace_back(br.a, br.b);

  std::string why;
  bool ok = true;
  if (v.max_re_outside > settings.tol_stab) {
    ok = false;
    why += "unstable spectrum outside the origin ball (max Re = " +
           std::to_string(v.max_re_outside) + "); ";
  }
  for (size_t j = 0; j < fit.branches.size(); ++j) {
    if (std::abs(fit.branches[j].a.imag()) > settings.tol_hyp) {
      ok = false;
      why += "hyperbolic (first-order) instability on neutral curve " + std::to_string(j) +
             " (Im a = " + std::to_string(fit.branches[j].a.imag()) + "); ";
    }
    if (fit.branches[j].b.real() < -settings.tol_curv) {
      ok = false;
      why += "parabolic (curvature) instability on neutral curve " + std::to_string(j) +
             " (Re b = " + std::to_string(fit.branches[j].b.real()) + "); ";
    }
  }
  if (v.fifth_max_re > settings.tol_stab) {
    ok = false;
    why += "co-periodic instability on the near-origin curve (max Re = " +
           std::to_string(v.fifth_max_re) + "); ";
  }
  v.stable = ok;
  v.diagnostics = ok ? "diffusively spectrally stable" : why;
  return v;
}

SpectrumRun run_hill(const PeriodicProfile& profile, const SystemSpec& spec,
                     const HillSettings& settings) {
  SpectrumRun run;
  BlochOperator op = linearize_about(profile, spec, settings.n_modes);
  run.samples = compute_spectrum(op, settings.n_floquet, settings.workers);

  const double zone = M_PI / profile.X;
  const double step =
      settings.n_floquet > 1 ? 2.0 * zone / (settings.n_floquet - 1) : zone;
  double fr = settings.fit_radius > 0.0 ? settings.fit_radius
                                        : std::min(8.0 * step, 0.45 * zone);
  WhithamFit fit = fit_whitham_curves(run.samples, fr, spec.n + 1);
  if (fit.max_jump_ratio > 10.0) {
    // jumpy matches: refine the window with half-step samples and refit
    std::vector<SpectrumSample> refined = run.samples;
    for (int i = 0; i + 1 < static_cast<int>(run.samples.size()); ++i) {
      const double a = run.samples[i].xi, b = run.samples[i + 1].xi;
      if (std::max(std::abs(a), std::abs(b)) <= fr + step) {
        const double mid = 0.5 * (a + b);
        refined.push_back({mid, eigenvalues(build_hill_matrix(op, mid))});
      }
    }
    fit = fit_whitham_curves(refined, fr, spec.n + 1);
  }
  run.fit = fit;
  run.verdict = classify(run.samples, fit, settings);
  return run;
}

StabilityVerdict classify_profile(const PeriodicProfile& profile, const SystemSpec& spec,
                                  const HillSettings& settings) {
  return run_hill(profile, spec, settings).verdict;
}

}  // namespace turwave
