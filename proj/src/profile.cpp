#include "turwave/profile.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

namespace turwave {

Vector FourierGrid::nodes() const {
  Vector x(M);
  for (int m = 0; m < M; ++m) x[m] = X * double(m) / M;
  return x;
}

Matrix FourierGrid::diff_matrix() const {
  if (M % 2 != 0) throw std::invalid_argument("FourierGrid: M must be even");
  Matrix Dm = Matrix::Zero(M, M);
  for (int j = 0; j < M; ++j)
    for (int k = 0; k < M; ++k) {
      if (j == k) continue;
      const int d = j - k;
      const double sign = (d % 2 == 0) ? 1.0 : -1.0;
      Dm(j, k) = 0.5 * sign / std::tan(M_PI * double(d) / M);
    }
  return Dm * (2.0 * M_PI / X);
}

double oscillation_amplitude(const Matrix& grid) {
  Vector mean = grid.rowwise().mean();
  return (grid.colwise() - mean).cwiseAbs().maxCoeff();
}

namespace {

Vector resolve_q(const Vector& q, int n) {
  if (q.size() == 0) return Vector::Zero(n);
  if (q.size() != n) throw std::invalid_argument("profile: q has wrong dimension");
  return q;
}

Vector draw_phase_vector(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector w(n);
  do {
    for (int i = 0; i < n; ++i) w[i] = gauss(rng);
  } while (w.norm() < 1e-12);
  return w / w.norm();
}

struct NewtonResult {
  Matrix u;
  double eps;
  double residual;
  bool singular = false;
  bool converged = false;
};

NewtonResult newton_iterate(const Matrix& guess, double X, double c,
                            const SystemSpec& spec, double eps0, const Vector& q,
                            const Vector& w, const NewtonOptions& opts) {
  const int n = spec.n;
  const int M = static_cast<int>(guess.cols());
  const FourierGrid fg(M, X);
  const Matrix Dm = fg.diff_matrix();
  const Matrix& Dv = spec.D;
  const Eigen::PartialPivLU<Matrix> Dlu(Dv);
  const int r = spec.eps_slot[0], s = spec.eps_slot[1];
  const Matrix I = Matrix::Identity(n, n);

  NewtonResult out{guess, eps0, std::numeric_limits<double>::infinity()};
  Eigen::VectorXd F(n * M + 1);
  Matrix J(n * M + 1, n * M + 1);
  bool polish = false;  // one extra update after crossing the tolerance

  for (int it = 0; it <= opts.max_iter; ++it) {
    const Matrix A = evaluate_A(spec, out.eps);
    // residual
    Matrix Up = out.u * Dm.transpose();
    Matrix R = Dv * Up;
    for (int m = 0; m < M; ++m) {
      const Vector um = out.u.col(m);
      R.col(m) += q - (A * um + nonlinear_term(spec, um) - c * um);
    }
    const Vector u0 = out.u.col(0);
    const Vector f0 = Dlu.solve(Vector(A * u0 + nonlinear_term(spec, u0) - c * u0 - q));
    const double phase = w.dot(f0);
    out.residual = std::max(R.cwiseAbs().maxCoeff(), std::abs(phase));
    if (out.residual <= opts.tol) {
      out.converged = true;
      if (polish) return out;
      polish = true;  // take one more quadratically-convergent step
    }
    if (it == opts.max_iter) break;

    // bordered Jacobian: Mn residual rows plus the phase row
    J.setZero();
    for (int m = 0; m < M; ++m) {
      for (int l = 0; l < M; ++l) {
        if (Dm(m, l) != 0.0)
          J.block(m * n, l * n, n, n) = Dm(m, l) * Dv;
      }
      Matrix B = A - c * I;
      B(0, 0) += nonlinear_term_derivative(spec, out.u(0, m));
      J.block(m * n, m * n, n, n) -= B;
      J(m * n + r, n * M) = -out.u(s, m);
    }
    {
      Matrix B0 = A - c * I;
      B0(0, 0) += nonlinear_term_derivative(spec, out.u(0, 0));
      J.block(n * M, 0, 1, n) = (w.transpose() * Dlu.solve(B0));
      Vector e_r = Vector::Zero(n);
      e_r[r] = out.u(s, 0);
      J(n * M, n * M) = w.dot(Dlu.solve(e_r));
    }
    for (int m = 0; m < M; ++m) F.segment(m * n, n) = R.col(m);
    F[n * M] = phase;

    Eigen::VectorXd delta = J.partialPivLu().solve(F);
    if (!delta.allFinite() || delta.cwiseAbs().maxCoeff() > 1e10) {
      out.singular = true;
      return out;
    }
    for (int m = 0; m < M; ++m) out.u.col(m) -= delta.segment(m * n, n);
    out.eps -= delta[n * M];
  }
  out.converged = out.residual <= opts.tol;
  return out;
}

}  // namespace

Matrix profile_residual(const Matrix& u_grid, double X, double c, double eps,
                        const Vector& q, const SystemSpec& spec) {
  const int M = static_cast<int>(u_grid.cols());
  if (M < 16 || M % 2 != 0)
    throw std::invalid_argument("profile_residual: M must be even and >= 16");
  if (u_grid.rows() != spec.n)
    throw std::invalid_argument("profile_residual: grid dimension mismatch");
  const Vector qv = resolve_q(q, spec.n);
  const FourierGrid fg(M, X);
  const Matrix A = evaluate_A(spec, eps);
  Matrix R = spec.D * (u_grid * fg.diff_matrix().transpose());
  for (int m = 0; m < M; ++m) {
    const Vector um = u_grid.col(m);
    R.col(m) += qv - (A * um + nonlinear_term(spec, um) - c * um);
  }
  return R;
}

Matrix initial_guess(const TuringPoint& turing, const SystemSpec& spec, int M, double X,
                     double eps_guess, double shrink) {
  const Matrix A = evaluate_A(spec, turing.eps_star);
  const Matrix J = spec.D.partialPivLu().solve(
      Matrix(A - turing.c_star * Matrix::Identity(spec.n, spec.n)));
  EigenPairs ep = eigenpairs(J);
  int pick = -1;
  double best = 0.0;
  for (int k = 0; k < ep.values.size(); ++k) {
    const double im = ep.values[k].imag();
    if (im > 1e-10 && std::abs(im) > best) {  // one of the conjugate pair
      best = std::abs(im);
      pick = k;
    }
  }
  if (pick < 0)
    throw NotHopfError("initial_guess: profile Jacobian has no complex eigenvalue pair");
  CVector v = ep.vectors.col(pick);
  v /= v.norm();
  // deterministic phase: rotate the largest component to the positive real axis
  int jmax = 0;
  for (int k = 1; k < v.size(); ++k)
    if (std::abs(v[k]) > std::abs(v[jmax])) jmax = k;
  v *= std::polar(1.0, -std::arg(v[jmax]));

  const double amp = std::sqrt(eps_guess) / shrink;
  Matrix out(spec.n, M);
  for (int m = 0; m < M; ++m) {
    const double x = X * double(m) / M;
    const Complex phase = std::polar(1.0, 2.0 * M_PI * x / X);
    for (int i = 0; i < spec.n; ++i) out(i, m) = amp * (phase * v[i]).real();
  }
  return out;
}

PeriodicProfile solve_profile(const Matrix& guess, double X, double c,
                              const SystemSpec& spec, double eps0, const Vector& q,
                              const NewtonOptions& opts, const Vector* w_fixed) {
  if (guess.rows() != spec.n)
    throw std::invalid_argument("solve_profile: guess dimension mismatch");
  const Vector qv = resolve_q(q, spec.n);
  Vector w = w_fixed ? *w_fixed : draw_phase_vector(spec.n, opts.w_seed);

  NewtonResult res = newton_iterate(guess, X, c, spec, eps0, qv, w, opts);
  if (res.singular && !w_fixed) {
    // degenerate phase vector: redraw once and retry from the original guess
    w = draw_phase_vector(spec.n, opts.w_seed + 1);
    res = newton_iterate(guess, X, c, spec, eps0, qv, w, opts);
  }
  if (res.singular)
    throw NewtonError("solve_profile: singular Jacobian");
  if (!res.converged)
    throw NewtonError("solve_profile: no convergence after " +
                      std::to_string(opts.max_iter) + " iterations (residual " +
                      std::to_string(res.residual) + ")");
  if (oscillation_amplitude(res.u) < opts.trivial_tol)
    throw TrivialSolutionError("solve_profile: converged to the trivial constant state");

  PeriodicProfile p;
  p.X = X;
  p.c = c;
  p.eps = res.eps;
  p.q = qv;
  p.grid = res.u;
  p.phase_w = w;
  p.residual_norm = res.residual;
  p.system_label = spec.label;
  return p;
}

PeriodicProfile constant_profile(const SystemSpec& spec, double eps, double c,
                                 double X, int M) {
  PeriodicProfile p;
  p.X = X;
  p.c = c;
  p.eps = eps;
  p.q = Vector::Zero(spec.n);
  p.grid = Matrix::Zero(spec.n, M);
  p.phase_w = Vector::Zero(spec.n);
  p.residual_norm = 0.0;
  p.system_label = spec.label;
  return p;
}

ContinuationFamily continue_family(const PeriodicProfile& seed, const SystemSpec& spec,
                                   double c_lo, double c_hi, int nc,
                                   double X_lo, double X_hi, int nX,
                                   const NewtonOptions& opts) {
  if (seed.residual_norm > 1e-8)
    throw std::invalid_argument("continue_family: seed profile is not converged");
  if (nc < 1 || nX < 1) throw std::invalid_argument("continue_family: empty grid");

  ContinuationFamily fam;
  fam.c_values.resize(nc);
  fam.X_values.resize(nX);
  for (int i = 0; i < nc; ++i)
    fam.c_values[i] = nc == 1 ? c_lo : c_lo + (c_hi - c_lo) * double(i) / (nc - 1);
  for (int j = 0; j < nX; ++j)
    fam.X_values[j] = nX == 1 ? X_lo : X_lo + (X_hi - X_lo) * double(j) / (nX - 1);

  // grid points ordered by distance from the seed's parameters; the first
  // that converges from the seed starts the wavefront
  const double c_span = std::max(std::abs(c_hi - c_lo), 1e-12);
  const double X_span = std::max(std::abs(X_hi - X_lo), 1e-12);
  std::vector<std::pair<int, int>> order;
  for (int i = 0; i < nc; ++i)
    for (int j = 0; j < nX; ++j) order.emplace_back(i, j);
  std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
    auto d = [&](const std::pair<int, int>& p) {
      const double dc = (fam.c_values[p.first] - seed.c) / c_span;
      const double dX = (fam.X_values[p.second] - seed.X) / X_span;
      return dc * dc + dX * dX;
    };
    return d(a) < d(b);
  });

  auto try_solve = [&](const PeriodicProfile& from, int i, int j) -> bool {
    try {
      PeriodicProfile p = solve_profile(from.grid, fam.X_values[j], fam.c_values[i],
                                        spec, from.eps, from.q, opts, &from.phase_w);
      fam.members.emplace(std::make_pair(i, j), std::move(p));
      return true;
    } catch (const NewtonError&) {
      return false;
    } catch (const TrivialSolutionError&) {
      return false;
    }
  };

  // wavefront sweep; every unconverged point may be retried from each of its
  // converged neighbors until a full pass adds nothing
  for (const auto& [i, j] : order)
    if (try_solve(seed, i, j)) break;
  const int di[4] = {1, -1, 0, 0};
  const int dj[4] = {0, 0, 1, -1};
  bool progress = !fam.members.empty();
  while (progress) {
    progress = false;
    for (int i = 0; i < nc; ++i)
      for (int j = 0; j < nX; ++j) {
        if (fam.members.count({i, j})) continue;
        for (int k = 0; k < 4; ++k) {
          const int ni = i + di[k], nj = j + dj[k];
          if (ni < 0 || ni >= nc || nj < 0 || nj >= nX) continue;
          auto it = fam.members.find({ni, nj});
          if (it == fam.members.end()) continue;
          if (try_solve(it->second, i, j)) {
            progress = true;
            break;
          }
        }
      }
  }
  fam.provenance = TuringPoint{};
  return fam;
}

PeriodicProfile continue_to(const PeriodicProfile& seed, const SystemSpec& spec,
                            double c_target, double X_target,
                            double max_step, double min_step, const NewtonOptions& opts) {
  PeriodicProfile cur = seed;
  const double c0 = seed.c, X0 = seed.X;
  double t = 0.0, step = max_step;
  while (t < 1.0) {
    const double tn = std::min(1.0, t + step);
    const double ci = c0 + (c_target - c0) * tn;
    const double Xi = X0 + (X_target - X0) * tn;
    try {
      PeriodicProfile next =
          solve_profile(cur.grid, Xi, ci, spec, cur.eps, cur.q, opts, &cur.phase_w);
      cur = std::move(next);
      t = tn;
      step = std::min(max_step, step * 1.5);
    } catch (const std::runtime_error&) {
      step *= 0.5;
      if (step < min_step)
        throw NewtonError("continue_to: continuation stalled at t=" + std::to_string(t));
    }
  }
  return cur;
}

PeriodicProfile homotopy_to_cubic(const PeriodicProfile& seed, const SystemSpec& spec,
                                  int h_steps, const NewtonOptions& opts) {
  if (seed.residual_norm > 1e-8)
    throw std::invalid_argument("homotopy_to_cubic: seed profile is not converged");
  if (h_steps < 1) throw std::invalid_argument("homotopy_to_cubic: h_steps must be >= 1");
  PeriodicProfile cur = seed;
  for (int k = 1; k <= h_steps; ++k) {
    const double h = double(k) / h_steps;
    const SystemSpec spec_h = with_nonlinearity(spec, {NonlinKind::homotopy, h});
    try {
      cur = solve_profile(cur.grid, cur.X, cur.c, spec_h, cur.eps, cur.q, opts,
                          &cur.phase_w);
    } catch (const std::runtime_error& e) {
      throw NewtonError("homotopy_to_cubic: lost convergence at h=" + std::to_string(h) +
                        " (" + e.what() + ")");
    }
  }
  cur.system_label = spec.label;
  return cur;
}

PeriodicProfile subcritical_from_sign_map(const PeriodicProfile& cubic_profile,
                                          const SystemSpec& cubic_spec, double c_star,
                                          const NewtonOptions& opts) {
  if (cubic_spec.nonlin.kind != NonlinKind::cubic)
    throw std::invalid_argument("subcritical_from_sign_map: spec must be cubic");
  const SystemSpec flipped = negate_beta(cubic_spec);
  const int M = cubic_profile.M();
  Matrix reflected(cubic_profile.n(), M);
  for (int m = 0; m < M; ++m)
    reflected.col(m) = cubic_profile.grid.col((M - m) % M);
  const double c_mapped = 2.0 * c_star - cubic_profile.c;  // c - c* -> -(c - c*)
  return solve_profile(reflected, cubic_profile.X, c_mapped, flipped,
                       -cubic_profile.eps, cubic_profile.q, opts);
}

void save_profile(const std::string& path, const PeriodicProfile& profile,
                  const SystemSpec& spec) {
  nlohmann::json doc;
  doc["format"] = "turwave-profile-v1";
  doc["system"] = system_to_json(spec);
  doc["X"] = profile.X;
  doc["c"] = profile.c;
  doc["eps"] = profile.eps;
  doc["q"] = std::vector<double>(profile.q.data(), profile.q.data() + profile.q.size());
  doc["M"] = profile.M();
  doc["n"] = profile.n();
  doc["phase_w"] = std::vector<double>(profile.phase_w.data(),
                                       profile.phase_w.data() + profile.phase_w.size());
  nlohmann::json grid = nlohmann::json::array();
  for (int m = 0; m < profile.M(); ++m) {
    nlohmann::json col = nlohmann::json::array();
    for (int i = 0; i < profile.n(); ++i) col.push_back(profile.grid(i, m));
    grid.push_back(col);
  }
  doc["grid"] = grid;
  doc["residual_norm"] = profile.residual_norm;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write profile record: " + path);
  out << doc.dump(2) << "\n";
}

LoadedProfile load_profile(const std::string& path, bool verify) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile record: " + path);
  nlohmann::json doc;
  in >> doc;
  if (doc.value("format", "") != std::string("turwave-profile-v1"))
    throw std::runtime_error("unrecognized profile record format in " + path);
  LoadedProfile lp;
  lp.system = load_system(doc.at("system"));
  PeriodicProfile& p = lp.profile;
  p.X = doc.at("X").get<double>();
  p.c = doc.at("c").get<double>();
  p.eps = doc.at("eps").get<double>();
  auto qv = doc.at("q").get<std::vector<double>>();
  p.q = Eigen::Map<const Vector>(qv.data(), qv.size());
  const int M = doc.at("M").get<int>();
  const int n = doc.at("n").get<int>();
  auto wv = doc.at("phase_w").get<std::vector<double>>();
  p.phase_w = Eigen::Map<const Vector>(wv.data(), wv.size());
  p.grid.resize(n, M);
  const auto& grid = doc.at("grid");
  if (static_cast<int>(grid.size()) != M)
    throw std::runtime_error("profile record grid size mismatch in " + path);
  for (int m = 0; m < M; ++m)
    for (int i = 0; i < n; ++i) p.grid(i, m) = grid[m][i].get<double>();
  p.residual_norm = doc.at("residual_norm").get<double>();
  p.system_label = lp.system.label;

  if (verify) {
    const Matrix R = profile_residual(p.grid, p.X, p.c, p.eps, p.q, lp.system);
    const double rn = R.cwiseAbs().maxCoeff();
    if (rn > 1e-8)
      throw std::runtime_error("profile record fails re-verification (residual " +
                               std::to_string(rn) + "): " + path);
  }
  return lp;
}

}  // namespace turwave
