#pragma once

#include <array>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "turwave/linalg.hpp"

namespace turwave {

enum class NonlinKind { none, quadratic, cubic, homotopy };

/// Single-component polynomial nonlinearity acting on u1:
///   quadratic: N(u) = beta*(u1^2, 0, ..., 0)
///   cubic:     N(u) = beta*(u1^3, 0, ..., 0)
///   homotopy:  N(u) = beta*(h*u1^3 + (1-h)*u1^2, 0, ..., 0),  h in [0,1]
struct Nonlinearity {
  NonlinKind kind = NonlinKind::none;
  double h = 0.0;  // homotopy weight, used only for kind==homotopy
};

/// An n x n system of viscous conservation laws
///   u_t + (A(eps) u + N(u))_x = D u_xx
/// where A(eps) = A_base + eps at the designated slot.
/// Immutable after load; safe to share across threads.
struct SystemSpec {
  int n = 0;
  Matrix A_base;
  std::array<int, 2> eps_slot{1, 1};  // 0-based (row, col)
  Matrix D;
  Nonlinearity nonlin;
  double beta = 0.0;
  std::string label;
};

std::string to_string(NonlinKind k);
NonlinKind nonlin_kind_from_string(const std::string& s);

/// Parses and validates a system description. Throws std::invalid_argument
/// on dimension mismatch, non-finite entries or unknown nonlinearity kind.
SystemSpec load_system(const nlohmann::json& doc);
SystemSpec load_system_file(const std::string& path);
nlohmann::json system_to_json(const SystemSpec& spec);

Matrix evaluate_A(const SystemSpec& spec, double eps);

/// N(u) as a vector; zero outside the first component.
Vector nonlinear_term(const SystemSpec& spec, const Vector& u);

/// d/du1 of the first component of N.
double nonlinear_term_derivative(const SystemSpec& spec, double u1);

/// A(eps) u + N(u)
Vector evaluate_flux(const SystemSpec& spec, const Vector& u, double eps);

/// A(eps) + dN(u)
Matrix evaluate_flux_jacobian(const SystemSpec& spec, const Vector& u, double eps);

/// Copy of the spec with beta negated (label annotated).
SystemSpec negate_beta(const SystemSpec& spec);

/// Copy with the nonlinearity replaced.
SystemSpec with_nonlinearity(const SystemSpec& spec, Nonlinearity nl);

}  // namespace turwave
