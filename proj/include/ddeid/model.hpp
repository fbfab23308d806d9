#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ddeid/expr.hpp"

namespace ddeid {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Nonlinear delayed-differential model
///
///   x'(t) = f(x(t), x(t - tau_1), ..., x(t - tau_l),
///             u(t), u(t - nu_1), ..., u(t - nu_r), p)
///   y(t)  = C x(t)
///
/// Equations reference state slot z_i (i = 0 undelayed), input slot w_j and
/// parameters by index. Delay values are not part of the structure; they live
/// in ParameterPoint.
struct ModelSpec {
  std::vector<std::string> state_names;
  std::vector<std::string> input_names;
  std::vector<std::string> param_names;
  std::vector<std::string> state_delay_names;  // tau_1..tau_l
  std::vector<std::string> input_delay_names;  // nu_1..nu_r
  std::vector<Expr> equations;                 // one per state, in order
  Matrix output_map;                           // C, m x n

  int n() const { return static_cast<int>(state_names.size()); }
  int k() const { return static_cast<int>(input_names.size()); }
  int p() const { return static_cast<int>(param_names.size()); }
  int l() const { return static_cast<int>(state_delay_names.size()); }
  int r() const { return static_cast<int>(input_delay_names.size()); }

  NameTable names() const {
    return {state_names, input_names, param_names, state_delay_names,
            input_delay_names};
  }
};

/// Concrete parameter values, delays and the constant input u_bar.
struct ParameterPoint {
  Vector p_s;
  Vector tau;
  Vector nu;
  Vector u_bar;

  double max_state_delay() const { return tau.size() ? tau.maxCoeff() : 0.0; }
  double max_input_delay() const { return nu.size() ? nu.maxCoeff() : 0.0; }
};

struct EquilibriumPoint {
  Vector x_e;
  double residual_norm = 0.0;  // max-norm of f at E
  bool converged = false;
};

struct Violation {
  std::string code;
  std::string message;
};

namespace detail {

inline void check_refs(const Node& node, const ModelSpec& spec, int eq,
                       std::vector<Violation>& out) {
  auto bad = [&](const std::string& what) {
    out.push_back({"bad-reference", "equation " + std::to_string(eq + 1) +
                                        ": " + what + " out of bounds"});
  };
  switch (node.kind) {
    case NodeKind::State:
      if (node.index < 0 || node.index >= spec.n()) bad("state index");
      if (node.slot < 0 || node.slot > spec.l()) bad("state delay slot");
      return;
    case NodeKind::Input:
      if (node.index < 0 || node.index >= spec.k()) bad("input index");
      if (node.slot < 0 || node.slot > spec.r()) bad("input delay slot");
      return;
    case NodeKind::Param:
      if (node.index < 0 || node.index >= spec.p()) bad("parameter index");
      return;
    default: break;
  }
  if (node.lhs) check_refs(*node.lhs, spec, eq, out);
  if (node.rhs) check_refs(*node.rhs, spec, eq, out);
}

inline bool strictly_increasing_positive(const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) return false;
    if (i > 0 && !(v[i] > v[i - 1])) return false;
  }
  return true;
}

}  // namespace detail

/// Lists everything that prevents analysis. An empty list means analyzable.
inline std::vector<Violation> validate(const ModelSpec& spec,
                                       const ParameterPoint& point) {
  std::vector<Violation> out;
  const int n = spec.n();
  if (n == 0) out.push_back({"dimension", "model has no states"});
  if (static_cast<int>(spec.equations.size()) != n) {
    out.push_back({"dimension", "expected " + std::to_string(n) +
                                    " equations, found " +
                                    std::to_string(spec.equations.size())});
  }
  for (std::size_t i = 0; i < spec.equations.size(); ++i) {
    if (spec.equations[i].empty()) {
      out.push_back({"dimension",
                     "equation " + std::to_string(i + 1) + " is missing"});
    } else {
      detail::check_refs(spec.equations[i].root(), spec, static_cast<int>(i),
                         out);
    }
  }
  if (point.p_s.size() != spec.p() || point.tau.size() != spec.l() ||
      point.nu.size() != spec.r() || point.u_bar.size() != spec.k()) {
    out.push_back({"dimension", "parameter point does not match model"});
  }
  if (!point.p_s.allFinite() || !point.tau.allFinite() ||
      !point.nu.allFinite() || !point.u_bar.allFinite()) {
    out.push_back({"nonfinite", "parameter point has nonfinite entries"});
  }
  if (!detail::strictly_increasing_positive(point.tau)) {
    out.push_back({"delay-order",
                   "state delays not strictly increasing and positive"});
  }
  if (!detail::strictly_increasing_positive(point.nu)) {
    out.push_back({"delay-order",
                   "input delays not strictly increasing and positive"});
  }
  const Matrix& c = spec.output_map;
  if (c.cols() != n) {
    out.push_back({"dimension", "output map has wrong column count"});
  } else if (c.rows() != n || !c.isIdentity(0.0)) {
    out.push_back(
        {"unsupported-output", "non-identity output map unsupported"});
  }
  return out;
}

/// Binds slot references to concrete vectors of type N.
template <class N>
struct SlotEnv {
  const std::vector<std::vector<N>>* z = nullptr;  // l+1 slots of n values
  const std::vector<std::vector<N>>* w = nullptr;  // r+1 slots of k values
  const std::vector<N>* p = nullptr;

  N state(int var, int slot) const { return (*z)[slot][var]; }
  N input(int var, int slot) const { return (*w)[slot][var]; }
  N param(int i) const { return (*p)[i]; }
};

/// Environment over Eigen vectors of doubles, used on hot paths.
struct VectorSlotEnv {
  const std::vector<Vector>* z = nullptr;
  const std::vector<Vector>* w = nullptr;
  const Vector* p = nullptr;

  double state(int var, int slot) const { return (*z)[slot][var]; }
  double input(int var, int slot) const { return (*w)[slot][var]; }
  double param(int i) const { return (*p)[i]; }
};

/// f evaluated at the given slot values. Domain errors carry the equation
/// index.
inline Vector eval_rhs(const ModelSpec& spec, const std::vector<Vector>& z,
                       const std::vector<Vector>& w, const Vector& p_s) {
  if (static_cast<int>(z.size()) != spec.l() + 1 ||
      static_cast<int>(w.size()) != spec.r() + 1) {
    throw std::invalid_argument("eval_rhs: slot count mismatch");
  }
  for (const auto& v : z) {
    if (v.size() != spec.n())
      throw std::invalid_argument("eval_rhs: state slot size mismatch");
  }
  for (const auto& v : w) {
    if (v.size() != spec.k())
      throw std::invalid_argument("eval_rhs: input slot size mismatch");
  }
  if (p_s.size() != spec.p())
    throw std::invalid_argument("eval_rhs: parameter size mismatch");
  VectorSlotEnv env{&z, &w, &p_s};
  Vector out(spec.n());
  for (int i = 0; i < spec.n(); ++i) {
    try {
      out[i] = evaluate<double>(spec.equations[i], env);
    } catch (const DomainError& e) {
      throw e.with_equation(i);
    }
  }
  return out;
}

/// f(x, ..., x, u_bar, ..., u_bar, p_s): all delayed slots tied.
inline Vector eval_tied(const ModelSpec& spec, const Vector& x,
                        const Vector& u, const Vector& p_s) {
  std::vector<Vector> z(spec.l() + 1, x);
  std::vector<Vector> w(spec.r() + 1, u);
  return eval_rhs(spec, z, w, p_s);
}

}  // namespace ddeid
