#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>
#include <random>

#include "turwave/models.hpp"

using namespace turwave;

namespace {

SystemSpec fixture(const std::string& name) {
  return load_system_file(std::string(TURWAVE_FIXTURE_DIR) + "/" + name);
}

}  // namespace

TEST_CASE("load_system parses the quadratic study system") {
  SystemSpec spec = fixture("quadratic_beta_m10.json");
  CHECK(spec.n == 3);
  CHECK(spec.A_base(1, 1) == doctest::Approx(2.605173614560316).epsilon(1e-15));
  CHECK(spec.A_base(0, 0) == 1.0);
  CHECK(spec.A_base(2, 2) == 3.0);
  CHECK(spec.D(0, 2) == 2.0);
  CHECK(spec.D(2, 1) == -2.0);
  CHECK(spec.nonlin.kind == NonlinKind::quadratic);
  CHECK(spec.beta == -10.0);
}

TEST_CASE("load_system accepts a scalar heat equation") {
  nlohmann::json doc = {
      {"n", 1}, {"A_base", {{0.0}}}, {"D", {{1.0}}},
      {"nonlinearity", {{"kind", "none"}}}, {"A_eps_slot", {0, 0}}};
  SystemSpec spec = load_system(doc);
  CHECK(spec.n == 1);
  CHECK(spec.D(0, 0) == 1.0);
}

TEST_CASE("load_system rejects malformed input") {
  nlohmann::json bad_dims = {
      {"n", 3},
      {"A_base", {{1.0, 0.0, 0.0}, {0.0, 2.0, 0.0}, {0.0, 0.0, 3.0}}},
      {"D", {{1.0, 0.0}, {0.0, 1.0}}},
      {"nonlinearity", {{"kind", "none"}}}};
  CHECK_THROWS_AS(load_system(bad_dims), std::invalid_argument);

  nlohmann::json bad_kind = {
      {"n", 1}, {"A_base", {{1.0}}}, {"D", {{1.0}}},
      {"nonlinearity", {{"kind", "quartic"}}}};
  CHECK_THROWS_AS(load_system(bad_kind), std::invalid_argument);

  nlohmann::json nonfinite = {
      {"n", 1}, {"A_base", {{1.0}}}, {"D", {{1.0}}},
      {"nonlinearity", {{"kind", "none"}}}};
  nonfinite["A_base"][0][0] = "not a number";
  CHECK_THROWS(load_system(nonfinite));
}

TEST_CASE("evaluate_A adds eps at the designated slot") {
  SystemSpec spec = fixture("quadratic_beta_m10.json");
  Matrix A0 = evaluate_A(spec, 0.0);
  CHECK(A0(1, 1) == doctest::Approx(2.605173614560316).epsilon(1e-15));
  Matrix A = evaluate_A(spec, 0.2);
  CHECK(A(1, 1) == doctest::Approx(2.805173614560316).epsilon(1e-15));
  CHECK(A(0, 0) == 1.0);

  SystemSpec sing = fixture("singular_A.json");
  Matrix As = evaluate_A(sing, 0.0);
  CHECK(As(0, 0) == 1.0);
  CHECK(As(1, 1) == 0.0);
  CHECK(As(2, 2) == 1.0);
}

TEST_CASE("evaluate_flux matches hand values") {
  SystemSpec spec = fixture("quadratic_beta_m10.json");
  Vector u(3);
  u << 1.0, 0.0, 0.0;
  Vector f = evaluate_flux(spec, u, 0.0);
  CHECK(f[0] == doctest::Approx(-9.0));
  CHECK(f[1] == 0.0);
  CHECK(f[2] == 0.0);

  SystemSpec cubic = fixture("cubic_beta_p10.json");
  Vector v(3);
  v << 0.0, 1.0, 1.0;
  Vector g = evaluate_flux(cubic, v, 0.0);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == doctest::Approx(2.605173614560316));
  CHECK(g[2] == doctest::Approx(3.0));

  CHECK(evaluate_flux(spec, Vector::Zero(3), 0.37).norm() == 0.0);
}

TEST_CASE("flux jacobian hand values") {
  SystemSpec quad = fixture("quadratic_beta_m10.json");
  CHECK(evaluate_flux_jacobian(quad, Vector::Zero(3), 0.1)(0, 0) == 1.0);
  Vector u(3);
  u << 1.0, 0.0, 0.0;
  CHECK(evaluate_flux_jacobian(quad, u, 0.0)(0, 0) == doctest::Approx(-19.0));

  SystemSpec cubic = fixture("cubic_beta_p10.json");
  Vector v(3);
  v << 2.0, 0.0, 0.0;
  CHECK(evaluate_flux_jacobian(cubic, v, 0.0)(0, 0) == doctest::Approx(121.0));
}

TEST_CASE("flux jacobian agrees with central finite differences") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (const char* name :
       {"quadratic_beta_m10.json", "cubic_beta_p10.json", "cubic_beta_m10.json"}) {
    SystemSpec spec = fixture(name);
    for (int trial = 0; trial < 30; ++trial) {
      Vector u(3);
      for (int i = 0; i < 3; ++i) u[i] = unif(rng);
      const double eps = 0.1 * unif(rng);
      Matrix J = evaluate_flux_jacobian(spec, u, eps);
      const double h = 1e-6;
      Matrix Jfd(3, 3);
      for (int j = 0; j < 3; ++j) {
        Vector up = u, um = u;
        up[j] += h;
        um[j] -= h;
        Jfd.col(j) = (evaluate_flux(spec, up, eps) - evaluate_flux(spec, um, eps)) / (2 * h);
      }
      CHECK((J - Jfd).norm() <= 1e-6 * std::max(1.0, J.norm()));
    }
  }
}

TEST_CASE("quadratic sign symmetry behind 'u for beta implies -u for -beta'") {
  // N(-u; -beta) = -N(u; beta), hence f(-u; -beta) = -f(u; beta) for the
  // full flux: negating both the state and beta negates the profile equation
  SystemSpec spec = fixture("quadratic_beta_m10.json");
  SystemSpec flipped = negate_beta(spec);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vector u(3);
    for (int i = 0; i < 3; ++i) u[i] = unif(rng);
    const double eps = 0.1 * unif(rng);
    Vector a = nonlinear_term(flipped, Vector(-u));
    Vector b = -nonlinear_term(spec, u);
    CHECK((a - b).norm() <= 1e-14 * std::max(1.0, b.norm()));
    Vector fa = evaluate_flux(flipped, Vector(-u), eps);
    Vector fb = -evaluate_flux(spec, u, eps);
    CHECK((fa - fb).norm() <= 1e-13 * std::max(1.0, fb.norm()));
  }
}

TEST_CASE("homotopy endpoints reproduce quadratic and cubic exactly") {
  SystemSpec quad = fixture("quadratic_beta_m10.json");
  SystemSpec cubic = negate_beta(fixture("cubic_beta_p10.json"));  // beta = -10 cubic
  SystemSpec h0 = with_nonlinearity(quad, {NonlinKind::homotopy, 0.0});
  SystemSpec h1 = with_nonlinearity(quad, {NonlinKind::homotopy, 1.0});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vector u(3);
    for (int i = 0; i < 3; ++i) u[i] = unif(rng);
    CHECK(nonlinear_term(h0, u) == nonlinear_term(quad, u));
    CHECK(nonlinear_term(h1, u) == nonlinear_term(cubic, u));
    CHECK(nonlinear_term_derivative(h0, u[0]) == nonlinear_term_derivative(quad, u[0]));
    CHECK(nonlinear_term_derivative(h1, u[0]) == nonlinear_term_derivative(cubic, u[0]));
  }
}

TEST_CASE("system json round-trip") {
  SystemSpec spec = fixture("cubic_beta_m10.json");
  SystemSpec back = load_system(system_to_json(spec));
  CHECK(back.n == spec.n);
  CHECK((back.A_base - spec.A_base).norm() == 0.0);
  CHECK((back.D - spec.D).norm() == 0.0);
  CHECK(back.beta == spec.beta);
  CHECK(back.nonlin.kind == spec.nonlin.kind);
  CHECK(back.eps_slot == spec.eps_slot);
}
