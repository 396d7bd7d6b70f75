#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "turwave/dispersion.hpp"

using namespace turwave;

namespace {

SystemSpec fixture(const std::string& name) {
  return load_system_file(std::string(TURWAVE_FIXTURE_DIR) + "/" + name);
}

// multiset distance between two spectra
double spectra_distance(CVector a, CVector b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  std::vector<bool> used(b.size(), false);
  for (int i = 0; i < a.size(); ++i) {
    int best = -1;
    double bd = 1e300;
    for (int j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(a[i] - b[j]);
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    used[best] = true;
    worst = std::max(worst, bd);
  }
  return worst;
}

}  // namespace

TEST_CASE("symbol_matrix basic values") {
  Matrix A1(1, 1), D1(1, 1);
  A1 << 1.0;
  D1 << 1.0;
  CHECK(std::abs(symbol_matrix(A1, D1, 1.0)(0, 0) - Complex(-1.0, -1.0)) < 1e-15);

  SystemSpec spec = fixture("quadratic_beta_m10.json");
  CHECK(symbol_matrix(spec.A_base, spec.D, 0.0).norm() == 0.0);

  const double xi = 1.16;
  CMatrix S = symbol_matrix(evaluate_A(spec, 0.0), spec.D, xi);
  CMatrix expect = Complex(0, -xi) * evaluate_A(spec, 0.0).cast<Complex>() -
                   (xi * xi) * spec.D.cast<Complex>();
  CHECK((S - expect).norm() == 0.0);
}

TEST_CASE("check_cond on the study systems") {
  SystemSpec spec = fixture("quadratic_beta_m10.json");
  CondReport rep = check_cond(evaluate_A(spec, 0.0), spec.D);
  CHECK(rep.strictly_hyperbolic);
  CHECK(rep.positive_diagonal);
  CHECK(rep.D_spectrum_unstable);  // sigma(D) = {1}
  CHECK(rep.passes());

  SystemSpec sing = fixture("singular_A.json");
  CondReport rs = check_cond(evaluate_A(sing, 0.0), sing.D);
  CHECK_FALSE(rs.strictly_hyperbolic);
  CHECK_FALSE(rs.passes());

  Matrix A2 = Matrix::Zero(2, 2);
  A2(0, 0) = 1.0;
  A2(1, 1) = 2.0;
  CHECK(check_cond(A2, Matrix::Identity(2, 2)).passes());

  Matrix off(2, 2);
  off << 1.0, 0.5, 0.0, 2.0;
  CHECK_THROWS_AS(check_cond(off, Matrix::Identity(2, 2)), std::invalid_argument);
}

TEST_CASE("max_growth reproduces the study system's neutral crossing") {
  SystemSpec spec = fixture("quadratic_beta_m10.json");

  GrowthResult at0 = max_growth(evaluate_A(spec, 0.0), spec.D);
  CHECK(std::abs(at0.growth) <= 1e-6);
  CHECK(at0.xi_at_max == doctest::Approx(1.16).epsilon(0.02));

  CHECK(max_growth(evaluate_A(spec, -0.2), spec.D).growth < 0.0);
  CHECK(max_growth(evaluate_A(spec, 0.2), spec.D).growth > 0.0);

  // diagonal A with identity viscosity: lambda_j = -i a_j xi - xi^2 < 0
  Matrix A = Matrix::Zero(3, 3);
  A(0, 0) = 1.0;
  A(1, 1) = 2.0;
  A(2, 2) = 3.0;
  CHECK(max_growth(A, Matrix::Identity(3, 3)).growth < 0.0);
}

TEST_CASE("hopf_eigenvalues") {
  SystemSpec spec = fixture("quadratic_beta_m10.json");
  // c* ~ 1.2959: spectrum of D^{-1}(A - c* I) contains a pair ~ +-1.157i
  CVector w = hopf_eigenvalues(evaluate_A(spec, 0.0), spec.D, 1.2959);
  bool has_pair = false;
  for (int i = 0; i < w.size(); ++i)
    if (std::abs(w[i].real()) < 5e-3 && std::abs(std::abs(w[i].imag()) - 1.157) < 5e-3)
      has_pair = true;
  CHECK(has_pair);

  Matrix A2 = Matrix::Zero(2, 2);
  A2(0, 0) = 1.0;
  A2(1, 1) = 2.0;
  CVector v = hopf_eigenvalues(A2, Matrix::Identity(2, 2), 0.0);
  CHECK(v[0] == Complex(2.0, 0.0));
  CHECK(v[1] == Complex(1.0, 0.0));

  // A diagonal, D = I: spectrum of A - cI is always real
  for (double c : {-1.0, 0.0, 0.7}) {
    CVector vv = hopf_eigenvalues(A2, Matrix::Identity(2, 2), c);
    for (int i = 0; i < vv.size(); ++i) CHECK(std::abs(vv[i].imag()) < 1e-12);
  }

  CHECK_THROWS_AS(hopf_eigenvalues(A2, Matrix::Zero(2, 2), 0.0), std::invalid_argument);
}

TEST_CASE("find_turing_point reproduces the published onset") {
  SystemSpec spec = fixture("quadratic_beta_m10.json");
  TuringPoint tp = find_turing_point(spec, -0.2, 0.2);
  CHECK(std::abs(tp.eps_star) <= 1e-6);
  CHECK(tp.xi_star == doctest::Approx(1.16).epsilon(0.02));
  CHECK(tp.tau == doctest::Approx(1.5).epsilon(0.02));
  CHECK(tp.c_star == doctest::Approx(1.30).epsilon(0.016));
  CHECK(tp.X_star == doctest::Approx(2.0 * M_PI / tp.xi_star));

  // invariants: neutral growth at eps*, Hopf pair of the profile Jacobian
  GrowthResult g = max_growth(evaluate_A(spec, tp.eps_star), spec.D);
  CHECK(std::abs(g.growth) <= 1e-6);
  CVector hopf = hopf_eigenvalues(evaluate_A(spec, tp.eps_star), spec.D, tp.c_star);
  double best = 1e300;
  for (int i = 0; i < hopf.size(); ++i)
    best = std::min(best, std::abs(hopf[i] - Complex(0.0, tp.xi_star)));
  CHECK(best <= 1e-6);

  // narrow bracket agrees
  TuringPoint tp2 = find_turing_point(spec, -0.05, 0.05);
  CHECK(std::abs(tp2.eps_star - tp.eps_star) <= 1e-8);

  SystemSpec ident = fixture("identity_viscosity.json");
  CHECK_THROWS_AS(find_turing_point(ident, -0.2, 0.2), BracketError);
}

TEST_CASE("homotopy_D_search finds a crossing for the study viscosity") {
  SystemSpec spec = fixture("quadratic_beta_m10.json");
  Matrix A = evaluate_A(spec, 0.2);  // unstable at the full viscosity
  TuringPoint tp = homotopy_D_search(A, spec.D, 50);
  CHECK(tp.eps_star > 0.0);
  CHECK(tp.eps_star <= 1.0);
  CHECK(tp.xi_star > 0.0);

  // oracle: dense scan of the abscissa at the reported homotopy parameter
  const Matrix Dh = tp.eps_star * spec.D +
                    (1.0 - tp.eps_star) * Matrix::Identity(3, 3);
  double dense_max = -1e300;
  for (int i = 1; i <= 40000; ++i) {
    const double xi = 10.0 * double(i) / 40000;
    dense_max = std::max(dense_max, spectral_abscissa(symbol_matrix(A, Dh, xi)));
  }
  CHECK(std::abs(dense_max) <= 1e-6);

  Matrix Adiag = Matrix::Zero(3, 3);
  Adiag(0, 0) = 1.0;
  Adiag(1, 1) = 2.0;
  Adiag(2, 2) = 3.0;
  CHECK_THROWS_AS(homotopy_D_search(Adiag, Matrix::Identity(3, 3), 20), BracketError);
}

TEST_CASE("perturbing the nonstrict example yields a Turing crossing") {
  // perturb eps first to destabilize, then restore strict hyperbolicity
  SystemSpec sing = fixture("singular_A.json");
  Matrix A = evaluate_A(sing, 0.08);
  A(0, 0) += 0.015;  // break the 1,1 coincidence slightly
  CondReport rep = check_cond(A, Matrix::Identity(3, 3));
  CHECK(rep.strictly_hyperbolic);
  TuringPoint tp = homotopy_D_search(A, sing.D, 50);
  CHECK(tp.eps_star > 0.0);
  CHECK(tp.tau > 0.0);
}

TEST_CASE("conjugate symmetry of the symbol spectrum") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix A = Matrix::Zero(3, 3), D(3, 3);
    for (int i = 0; i < 3; ++i) A(i, i) = 3.0 * gauss(rng);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) D(i, j) = gauss(rng) + (i == j ? 2.0 : 0.0);
    const double xi = 2.0 * gauss(rng);
    CVector a = eigenvalues(symbol_matrix(A, D, xi));
    CVector b = eigenvalues(symbol_matrix(A, D, -xi));
    for (int i = 0; i < b.size(); ++i) b[i] = std::conj(b[i]);
    CHECK(spectra_distance(a, b) <= 1e-10 * std::max(1.0, a.norm()));
  }
}

TEST_CASE("small-xi expansion lambda_j = -i a_j xi - D_jj xi^2 + O(xi^3)") {
  SystemSpec spec = fixture("quadratic_beta_m10.json");
  const Matrix A = evaluate_A(spec, 0.0);
  const Matrix& D = spec.D;
  for (int j = 0; j < 3; ++j) {
    auto remainder = [&](double xi) {
      CVector w = eigenvalues(symbol_matrix(A, D, xi));
      const Complex target(-D(j, j) * xi * xi, -A(j, j) * xi);
      double best = 1e300;
      Complex pick;
      for (int i = 0; i < w.size(); ++i)
        if (std::abs(w[i] - target) < best) {
          best = std::abs(w[i] - target);
          pick = w[i];
        }
      return std::abs(pick - target);
    };
    // Richardson-style slope estimate on [0.025, 0.1]
    const double r1 = remainder(0.1), r2 = remainder(0.05), r3 = remainder(0.025);
    if (r1 > 1e-12) {
      const double slope = std::log2(r1 / r3) / 2.0;
      CHECK(slope >= 2.5);
    }
    CHECK(r2 <= 1e-3);
  }
}

TEST_CASE("large-xi limit: abscissa / xi^2 -> -min Re sigma(D)") {
  auto check_limit = [](const Matrix& A, const Matrix& D, double xi, double rel) {
    const double val = spectral_abscissa(symbol_matrix(A, D, xi));
    const double expect = -eigenvalues(D).real().minCoeff();
    CHECK(val / (xi * xi) == doctest::Approx(expect).epsilon(rel));
  };
  Matrix A = Matrix::Zero(3, 3);
  A(0, 0) = 1.0;
  A(1, 1) = 2.605173614560316;
  A(2, 2) = 3.0;

  // diagonalizable viscosities converge at rate O(1/xi)
  check_limit(A, Matrix::Identity(3, 3), 1e3, 0.05);
  Matrix Dt(3, 3);
  Dt << 1.0, 0.4, -0.2, 0.0, 1.5, 0.3, 0.0, 0.0, 2.2;
  check_limit(A, Dt, 1e3, 0.05);

  // the study viscosity has a triple eigenvalue with a nontrivial Jordan
  // block, so the split decays like (|A|/xi)^{1/3}; test farther out
  SystemSpec spec = fixture("quadratic_beta_m10.json");
  check_limit(evaluate_A(spec, 0.0), spec.D, 1e5, 0.05);
}

TEST_CASE("frame change shifts the spectrum by i c xi exactly") {
  SystemSpec spec = fixture("quadratic_beta_m10.json");
  const Matrix A = evaluate_A(spec, 0.1);
  const Matrix I = Matrix::Identity(3, 3);
  for (double xi : {0.3, 1.0, 2.7}) {
    for (double c : {-0.5, 1.2959}) {
      CVector shifted = eigenvalues(symbol_matrix(A - c * I, spec.D, xi));
      CVector base = eigenvalues(symbol_matrix(A, spec.D, xi));
      for (int i = 0; i < base.size(); ++i) base[i] += Complex(0, c * xi);
      sort_spectrum(base);
      CHECK(spectra_distance(shifted, base) <= 1e-12 * std::max(1.0, base.norm()));
    }
  }
}

TEST_CASE("no 2x2 finite-wavenumber instability (randomized)") {
  TwoByTwoReport rep = assert_no_2x2_turing(2000, 42);
  CHECK(rep.samples == 2000);
  CHECK(rep.violations == 0);
  CHECK(rep.symmetric_samples > 0);
  CHECK(rep.symmetric_violations == 0);
}

TEST_CASE("2x2 hand case: A=diag(1,-1), D=I has no neutral pair at any c") {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 1.0;
  A(1, 1) = -1.0;
  for (double c = -5.0; c <= 5.0; c += 0.05) {
    CVector w = hopf_eigenvalues(A, Matrix::Identity(2, 2), c);
    for (int i = 0; i < w.size(); ++i)
      CHECK_FALSE((std::abs(w[i].real()) < 1e-9 && std::abs(w[i].imag()) > 1e-9));
  }
}

TEST_CASE("symmetrizable obstruction") {
  // D + D^T of the study viscosity is indefinite: hypotheses must reject it
  SystemSpec spec = fixture("quadratic_beta_m10.json");
  Matrix A = Matrix::Zero(3, 3);
  A(0, 0) = 1.0;
  A(1, 1) = 2.0;
  A(2, 2) = 3.0;
  CHECK_THROWS_AS(assert_symmetrizable_obstruction(A, spec.D), std::invalid_argument);

  // admissible pair: triangular D with positive definite symmetric part
  Matrix A2 = Matrix::Zero(2, 2);
  A2(0, 0) = -1.0;
  A2(1, 1) = 1.0;
  Matrix D2(2, 2);
  D2 << 2.0, 1.0, 0.0, 2.0;
  CHECK(assert_symmetrizable_obstruction(A2, D2));

  // identity A: sigma(D^{-1}) lies in the right half-plane
  Matrix D3(3, 3);
  D3 << 2.0, 0.3, -0.1, -0.3, 1.5, 0.2, 0.1, -0.2, 1.0;
  CHECK(assert_symmetrizable_obstruction(Matrix::Identity(3, 3), D3));
}

TEST_CASE("coincident characteristics expose the indefinite reduced block") {
  SystemSpec sing = fixture("singular_A.json");
  auto blocks = coincident_mode_blocks(evaluate_A(sing, 0.0), sing.D);
  REQUIRE(blocks.size() == 1);
  CHECK(blocks[0].indices == std::vector<int>{0, 2});
  CHECK(blocks[0].det == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(blocks[0].unstable);

  SystemSpec quad = fixture("quadratic_beta_m10.json");
  CHECK(coincident_mode_blocks(evaluate_A(quad, 0.0), quad.D).empty());
}
