#include "turwave/models.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace turwave {

namespace {

Matrix parse_matrix(const nlohmann::json& rows, const std::string& name) {
  if (!rows.is_array() || rows.empty())
    throw std::invalid_argument("config: " + name + " must be a non-empty array of rows");
  const int nr = static_cast<int>(rows.size());
  const int nc = static_cast<int>(rows[0].size());
  Matrix m(nr, nc);
  for (int i = 0; i < nr; ++i) {
    if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != nc)
      throw std::invalid_argument("config: ragged rows in " + name);
    for (int j = 0; j < nc; ++j) {
      double v = rows[i][j].get<double>();
      if (!std::isfinite(v))
        throw std::invalid_argument("config: non-finite entry in " + name);
      m(i, j) = v;
    }
  }
  return m;
}

}  // namespace

std::string to_string(NonlinKind k) {
  switch (k) {
    case NonlinKind::none: return "none";
    case NonlinKind::quadratic: return "quadratic";
    case NonlinKind::cubic: return "cubic";
    case NonlinKind::homotopy: return "homotopy";
  }
  return "?";
}

NonlinKind nonlin_kind_from_string(const std::string& s) {
  if (s == "none") return NonlinKind::none;
  if (s == "quadratic") return NonlinKind::quadratic;
  if (s == "cubic") return NonlinKind::cubic;
  if (s == "homotopy") return NonlinKind::homotopy;
  throw std::invalid_argument("config: unknown nonlinearity kind '" + s + "'");
}

SystemSpec load_system(const nlohmann::json& doc) {
  SystemSpec spec;
  spec.n = doc.at("n").get<int>();
  if (spec.n <= 0) throw std::invalid_argument("config: n must be positive");
  spec.A_base = parse_matrix(doc.at("A_base"), "A_base");
  spec.D = parse_matrix(doc.at("D"), "D");
  if (spec.A_base.rows() != spec.A_base.cols())
    throw std::invalid_argument("config: A_base is not square");
  if (spec.D.rows() != spec.D.cols())
    throw std::invalid_argument("config: D is not square");
  if (spec.A_base.rows() != spec.n || spec.D.rows() != spec.n)
    throw std::invalid_argument("config: dimension mismatch between n, A_base and D");

  if (doc.contains("A_eps_slot")) {
    auto slot = doc.at("A_eps_slot");
    spec.eps_slot = {slot.at(0).get<int>(), slot.at(1).get<int>()};
  } else {
    spec.eps_slot = {std::min(1, spec.n - 1), std::min(1, spec.n - 1)};
  }
  if (spec.eps_slot[0] < 0 || spec.eps_slot[0] >= spec.n ||
      spec.eps_slot[1] < 0 || spec.eps_slot[1] >= spec.n)
    throw std::invalid_argument("config: A_eps_slot out of range");

  const auto& nl = doc.at("nonlinearity");
  if (nl.is_string()) {
    spec.nonlin.kind = nonlin_kind_from_string(nl.get<std::string>());
  } else {
    spec.nonlin.kind = nonlin_kind_from_string(nl.at("kind").get<std::string>());
    if (spec.nonlin.kind == NonlinKind::homotopy) {
      spec.nonlin.h = nl.at("h").get<double>();
      if (!(spec.nonlin.h >= 0.0 && spec.nonlin.h <= 1.0))
        throw std::invalid_argument("config: homotopy h must lie in [0,1]");
    }
  }
  spec.beta = doc.value("beta", 0.0);
  if (!std::isfinite(spec.beta)) throw std::invalid_argument("config: beta not finite");
  spec.label = doc.value("label", std::string("unnamed"));
  return spec;
}

SystemSpec load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open system config: " + path);
  nlohmann::json doc;
  in >> doc;
  return load_system(doc);
}

nlohmann::json system_to_json(const SystemSpec& spec) {
  nlohmann::json doc;
  doc["n"] = spec.n;
  auto mat = [](const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
      nlohmann::json r = nlohmann::json::array();
      for (int j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
      rows.push_back(r);
    }
    return rows;
  };
  doc["A_base"] = mat(spec.A_base);
  doc["A_eps_slot"] = {spec.eps_slot[0], spec.eps_slot[1]};
  doc["D"] = mat(spec.D);
  if (spec.nonlin.kind == NonlinKind::homotopy)
    doc["nonlinearity"] = {{"kind", "homotopy"}, {"h", spec.nonlin.h}};
  else
    doc["nonlinearity"] = {{"kind", to_string(spec.nonlin.kind)}};
  doc["beta"] = spec.beta;
  doc["label"] = spec.label;
  return doc;
}

Matrix evaluate_A(const SystemSpec& spec, double eps) {
  Matrix A = spec.A_base;
  A(spec.eps_slot[0], spec.eps_slot[1]) += eps;
  return A;
}

Vector nonlinear_term(const SystemSpec& spec, const Vector& u) {
  Vector N = Vector::Zero(spec.n);
  const double u1 = u[0];
  // parenthesization matches the homotopy evaluation bit for bit at h = 0, 1
  switch (spec.nonlin.kind) {
    case NonlinKind::none: break;
    case NonlinKind::quadratic: N[0] = spec.beta * (u1 * u1); break;
    case NonlinKind::cubic: N[0] = spec.beta * (u1 * u1 * u1); break;
    case NonlinKind::homotopy: {
      const double h = spec.nonlin.h;
      N[0] = spec.beta * (h * u1 * u1 * u1 + (1.0 - h) * (u1 * u1));
      break;
    }
  }
  return N;
}

double nonlinear_term_derivative(const SystemSpec& spec, double u1) {
  switch (spec.nonlin.kind) {
    case NonlinKind::none: return 0.0;
    case NonlinKind::quadratic: return spec.beta * (2.0 * u1);
    case NonlinKind::cubic: return spec.beta * (3.0 * u1 * u1);
    case NonlinKind::homotopy: {
      const double h = spec.nonlin.h;
      return spec.beta * (3.0 * h * u1 * u1 + 2.0 * (1.0 - h) * u1);
    }
  }
  return 0.0;
}

Vector evaluate_flux(const SystemSpec& spec, const Vector& u, double eps) {
  return evaluate_A(spec, eps) * u + nonlinear_term(spec, u);
}

Matrix evaluate_flux_jacobian(const SystemSpec& spec, const Vector& u, double eps) {
  Matrix J = evaluate_A(spec, eps);
  J(0, 0) += nonlinear_term_derivative(spec, u[0]);
  return J;
}

SystemSpec negate_beta(const SystemSpec& spec) {
  SystemSpec out = spec;
  out.beta = -spec.beta;
  out.label = spec.label + " (beta negated)";
  return out;
}

SystemSpec with_nonlinearity(const SystemSpec& spec, Nonlinearity nl) {
  SystemSpec out = spec;
  out.nonlin = nl;
  return out;
}

}  // namespace turwave
