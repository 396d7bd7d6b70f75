#include "turwave/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace turwave {

namespace {

constexpr double kGolden = 0.6180339887498949;  // (sqrt(5)-1)/2

bool is_diagonal(const Matrix& A, double tol) {
  double off = 0.0;
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      if (i != j) off = std::max(off, std::abs(A(i, j)));
  return off <= tol * std::max(1.0, A.norm());
}

double abscissa_at(const Matrix& A, const Matrix& D, double xi) {
  return spectral_abscissa(symbol_matrix(A, D, xi));
}

}  // namespace

CMatrix symbol_matrix(const Matrix& A, const Matrix& D, double xi) {
  if (A.rows() != D.rows() || A.cols() != D.cols() || A.rows() != A.cols())
    throw std::invalid_argument("symbol_matrix: dimension mismatch");
  return Complex(0, -xi) * A.cast<Complex>() - (xi * xi) * D.cast<Complex>();
}

SymbolSample sample_symbol(const Matrix& A, const Matrix& D, double xi) {
  return {xi, eigenvalues(symbol_matrix(A, D, xi))};
}

CondReport check_cond(const Matrix& A, const Matrix& D, double tol_distinct) {
  if (!is_diagonal(A, 1e-12))
    throw std::invalid_argument("check_cond: A must be diagonal");
  CondReport rep;
  const int n = static_cast<int>(A.rows());
  const double scale = std::max(1.0, A.norm());

  rep.min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      rep.min_gap = std::min(rep.min_gap, std::abs(A(i, i) - A(j, j)));
  if (n == 1) rep.min_gap = std::numeric_limits<double>::infinity();
  rep.strictly_hyperbolic = rep.min_gap > tol_distinct * scale;

  rep.min_D_diagonal = D.diagonal().minCoeff();
  rep.positive_diagonal = rep.min_D_diagonal > 0.0;

  CVector dw = eigenvalues(D);
  rep.min_D_spectrum_re = dw.real().minCoeff();
  rep.D_spectrum_unstable = rep.min_D_spectrum_re > 0.0;
  return rep;
}

GrowthResult max_growth(const Matrix& A, const Matrix& D, double xi_max, int grid_points) {
  if (xi_max <= 0.0 || grid_points < 3)
    throw std::invalid_argument("max_growth: need xi_max > 0 and grid_points >= 3");
  std::vector<double> xs(grid_points), vals(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    xs[i] = xi_max * double(i + 1) / grid_points;
    vals[i] = abscissa_at(A, D, xs[i]);
  }
  int best = int(std::max_element(vals.begin(), vals.end()) - vals.begin());
  if (best == grid_points - 1 && vals[best] > vals[best - 1])
    throw BracketError("max_growth: abscissa still increasing at xi_max; "
                       "enlarge xi_max or check the structural conditions");
  if (best == 0 || best == grid_points - 1)
    return {xs[best], vals[best]};

  // golden-section refinement of the interior bracket
  double lo = xs[best - 1], hi = xs[best + 1];
  double c = hi - kGolden * (hi - lo), d = lo + kGolden * (hi - lo);
  double fc = abscissa_at(A, D, c), fd = abscissa_at(A, D, d);
  while (hi - lo > 1e-10) {
    if (fc > fd) {
      hi = d; d = c; fd = fc;
      c = hi - kGolden * (hi - lo);
      fc = abscissa_at(A, D, c);
    } else {
      lo = c; c = d; fc = fd;
      d = lo + kGolden * (hi - lo);
      fd = abscissa_at(A, D, d);
    }
  }
  const double x = 0.5 * (lo + hi);
  return {x, abscissa_at(A, D, x)};
}

CVector hopf_eigenvalues(const Matrix& A, const Matrix& D, double c) {
  Eigen::FullPivLU<Matrix> lu(D);
  if (!lu.isInvertible())
    throw std::invalid_argument("hopf_eigenvalues: D is singular");
  Matrix M = lu.solve(A - c * Matrix::Identity(A.rows(), A.cols()));
  return eigenvalues(M);
}

TuringPoint find_turing_point(const SystemSpec& spec, double eps_lo, double eps_hi,
                              double eps_tol, double xi_max, int grid_points) {
  auto growth = [&](double e) {
    return max_growth(evaluate_A(spec, e), spec.D, xi_max, grid_points).growth;
  };
  double g_lo = growth(eps_lo), g_hi = growth(eps_hi);
  if (!(g_lo < 0.0 && g_hi > 0.0))
    throw BracketError("find_turing_point: no sign change of max growth over the bracket");

  double lo = eps_lo, hi = eps_hi;
  while (hi - lo > eps_tol) {
    const double mid = 0.5 * (lo + hi);
    (growth(mid) > 0.0 ? hi : lo) = mid;
  }

  TuringPoint tp;
  tp.eps_star = 0.5 * (lo + hi);
  GrowthResult gr = max_growth(evaluate_A(spec, tp.eps_star), spec.D, xi_max, grid_points);
  tp.xi_star = gr.xi_at_max;
  CVector w = eigenvalues(symbol_matrix(evaluate_A(spec, tp.eps_star), spec.D, tp.xi_star));
  const Complex crit = w[0];  // max Re first
  tp.tau = std::abs(crit.imag());
  if (tp.tau < 1e-8)
    throw NotHopfError("find_turing_point: neutral eigenvalue has zero imaginary part");
  tp.c_star = tp.tau / tp.xi_star;
  tp.X_star = 2.0 * M_PI / tp.xi_star;
  return tp;
}

TuringPoint homotopy_D_search(const Matrix& A, const Matrix& D_check, int steps,
                              double xi_max, int grid_points) {
  const int n = static_cast<int>(A.rows());
  {
    CondReport dc = check_cond(A, D_check);
    if (!dc.positive_diagonal || !dc.D_spectrum_unstable)
      throw std::invalid_argument("homotopy_D_search: D_check violates the viscosity conditions");
  }
  const Matrix I = Matrix::Identity(n, n);
  auto D_of = [&](double s) { return Matrix(s * D_check + (1.0 - s) * I); };
  auto growth = [&](double s) { return max_growth(A, D_of(s), xi_max, grid_points).growth; };

  double prev_s = 0.0, prev_g = growth(0.0);
  double cross_lo = -1.0, cross_hi = -1.0;
  for (int i = 1; i <= steps; ++i) {
    const double s = double(i) / steps;
    const double g = growth(s);
    if (prev_g < 0.0 && g >= 0.0) {
      cross_lo = prev_s;
      cross_hi = s;
      break;
    }
    prev_s = s;
    prev_g = g;
  }
  if (cross_lo < 0.0)
    throw BracketError("homotopy_D_search: no zero crossing of max growth on [0,1]");

  while (cross_hi - cross_lo > 1e-12) {
    const double mid = 0.5 * (cross_lo + cross_hi);
    (growth(mid) >= 0.0 ? cross_hi : cross_lo) = mid;
  }
  TuringPoint tp;
  tp.eps_star = 0.5 * (cross_lo + cross_hi);
  GrowthResult gr = max_growth(A, D_of(tp.eps_star), xi_max, grid_points);
  tp.xi_star = gr.xi_at_max;
  CVector w = eigenvalues(symbol_matrix(A, D_of(tp.eps_star), tp.xi_star));
  tp.tau = std::abs(w[0].imag());
  if (tp.tau < 1e-8)
    throw NotHopfError("homotopy_D_search: neutral eigenvalue has zero imaginary part");
  tp.c_star = tp.tau / tp.xi_star;
  tp.X_star = 2.0 * M_PI / tp.xi_star;
  return tp;
}

TwoByTwoReport assert_no_2x2_turing(int samples, std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> unif_a(-3.0, 3.0);
  std::uniform_real_distribution<double> unif_p(0.0, 2.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  TwoByTwoReport rep;
  rep.samples = samples;
  const double tol = 1e-9;

  for (int s = 0; s < samples; ++s) {
    // A diagonal with distinct entries
    double a1 = unif_a(rng), a2 = unif_a(rng);
    while (std::abs(a1 - a2) < 1e-3) a2 = unif_a(rng);
    Matrix A = Matrix::Zero(2, 2);
    A(0, 0) = a1;
    A(1, 1) = a2;

    // D = positive diagonal + off-diagonal noise, spectrum in right half-plane
    const bool symmetric_sample = (s % 4 == 0);
    Matrix D(2, 2);
    for (;;) {
      double p1 = unif_p(rng), p2 = unif_p(rng);
      if (p1 <= 1e-6 || p2 <= 1e-6) continue;
      double t12 = gauss(rng), t21 = symmetric_sample ? t12 : gauss(rng);
      D << p1, t12, t21, p2;
      if (eigenvalues(D).real().minCoeff() > 0.0) break;
    }
    if (symmetric_sample) ++rep.symmetric_samples;

    // D^{-1}(A - cI) has a pure-imaginary pair iff trace = 0 and det > 0.
    // The trace is affine in c, so the candidate c is found exactly.
    Matrix Dinv = D.inverse();
    Matrix M0 = Dinv * A;
    const double tr0 = M0.trace();
    const double trI = Dinv.trace();
    bool violation = false;
    if (std::abs(trI) > tol) {
      const double c0 = tr0 / trI;
      Matrix Mc = Dinv * (A - c0 * Matrix::Identity(2, 2));
      CVector w = eigenvalues(Mc);
      for (int k = 0; k < 2; ++k)
        if (std::abs(w[k].real()) < 1e-6 && std::abs(w[k].imag()) > 1e-6) violation = true;
    } else if (std::abs(tr0) < tol) {
      // trace vanishes for every c; scan det sign
      for (double c0 = -6.0; c0 <= 6.0; c0 += 0.1) {
        Matrix Mc = Dinv * (A - c0 * Matrix::Identity(2, 2));
        if (Mc.determinant() > tol) violation = true;
      }
    }
    if (violation) {
      ++rep.violations;
      if (symmetric_sample) ++rep.symmetric_violations;
    }
  }
  return rep;
}

bool assert_symmetrizable_obstruction(const Matrix& A, const Matrix& D, double tol) {
  const double scale = std::max(1.0, A.norm());
  if ((A - A.transpose()).norm() > tol * scale)
    throw std::invalid_argument("assert_symmetrizable_obstruction: A is not symmetric");
  Matrix sym = 0.5 * (D + D.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.eigenvalues().minCoeff() <= tol)
    throw std::invalid_argument(
        "assert_symmetrizable_obstruction: D + D^T is not positive definite");

  CVector w = hopf_eigenvalues(A, D, 0.0);  // spectrum of D^{-1} A
  for (int k = 0; k < w.size(); ++k)
    if (std::abs(w[k].real()) < tol && std::abs(w[k].imag()) > tol) return false;
  return true;
}

std::vector<CoincidentBlock> coincident_mode_blocks(const Matrix& A, const Matrix& D,
                                                    double tol) {
  if (!is_diagonal(A, 1e-12))
    throw std::invalid_argument("coincident_mode_blocks: A must be diagonal");
  const int n = static_cast<int>(A.rows());
  const double scale = std::max(1.0, A.norm());
  std::vector<bool> used(n, false);
  std::vector<CoincidentBlock> blocks;
  for (int i = 0; i < n; ++i) {
    if (used[i]) continue;
    std::vector<int> idx{i};
    for (int j = i + 1; j < n; ++j)
      if (!used[j] && std::abs(A(i, i) - A(j, j)) <= tol * scale) {
        idx.push_back(j);
        used[j] = true;
      }
    if (idx.size() < 2) continue;
    CoincidentBlock blk;
    blk.indices = idx;
    const int m = static_cast<int>(idx.size());
    blk.reduced_D.resize(m, m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) blk.reduced_D(r, c) = D(idx[r], idx[c]);
    blk.reduced_D_eigenvalues = eigenvalues(blk.reduced_D);
    blk.det = blk.reduced_D.determinant();
    blk.unstable = blk.reduced_D_eigenvalues.real().minCoeff() <= 0.0;
    blocks.push_back(std::move(blk));
  }
  return blocks;
}

}  // namespace turwave
