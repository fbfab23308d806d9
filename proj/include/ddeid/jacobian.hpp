#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ddeid/dual.hpp"
#include "ddeid/model.hpp"

namespace ddeid {

/// Jacobians of f with respect to each delayed state slot z_i (n x n) and
/// each delayed input slot w_j (n x k), at E = (x_e,..,x_e, u_bar,..,u_bar, p).
struct SlotJacobians {
  std::vector<Matrix> A;  // l+1
  std::vector<Matrix> B;  // r+1
};

namespace jac_detail {

// Environment that hands out seeded duals for the arguments whose direction
// falls in the active window and plain constants for everything else.
struct SeededEnv {
  const Vector* x = nullptr;
  const Vector* u = nullptr;
  const Vector* p = nullptr;
  std::size_t count = 0;
  // direction offsets, -1 when the block is not seeded
  std::vector<long> state_dir;  // per slot: first direction of that slot
  std::vector<long> input_dir;
  long param_dir = -1;
  bool tie_states = false;  // every state slot shares directions [0, n)
  long lo = 0, hi = 0;      // active direction window [lo, hi)

  Dual seeded(double v, long dir) const {
    if (dir < lo || dir >= hi) return Dual(v);
    return Dual::variable(v, static_cast<std::size_t>(dir - lo), count);
  }
  Dual state(int var, int slot) const {
    double v = (*x)[var];
    if (tie_states) return seeded(v, var);
    long base = state_dir[slot];
    return base < 0 ? Dual(v) : seeded(v, base + var);
  }
  Dual input(int var, int slot) const {
    double v = (*u)[var];
    long base = input_dir[slot];
    return base < 0 ? Dual(v) : seeded(v, base + var);
  }
  Dual param(int i) const {
    double v = (*p)[i];
    return param_dir < 0 ? Dual(v) : seeded(v, param_dir + i);
  }
};

// Fills `jac` (n x total) by evaluating in passes of `batch` directions.
inline void run_passes(const ModelSpec& spec, SeededEnv env, long total,
                       std::size_t batch, Matrix& jac) {
  const int n = spec.n();
  jac = Matrix::Zero(n, total);
  if (total == 0) return;
  long step = batch == 0 ? total : static_cast<long>(batch);
  for (long lo = 0; lo < total; lo += step) {
    env.lo = lo;
    env.hi = lo + step < total ? lo + step : total;
    env.count = static_cast<std::size_t>(env.hi - env.lo);
    for (int i = 0; i < n; ++i) {
      Dual out;
      try {
        out = evaluate<Dual>(spec.equations[i], env);
      } catch (const DomainError& e) {
        throw e.with_equation(i);
      }
      for (long c = env.lo; c < env.hi; ++c) {
        jac(i, c) = out.der(static_cast<std::size_t>(c - env.lo));
      }
    }
  }
}

}  // namespace jac_detail

inline std::string describe(const DomainError& e) {
  std::string s = e.what();
  if (e.equation() >= 0) s += " (equation " + std::to_string(e.equation() + 1) + ")";
  return s;
}

/// Slot Jacobians at E. `batch` directions are propagated per pass
/// (0 = all at once); the result does not depend on it.
inline SlotJacobians jacobian_slots(const ModelSpec& spec, const Vector& x_e,
                                    const ParameterPoint& point,
                                    std::size_t batch = 0) {
  const int n = spec.n(), k = spec.k(), l = spec.l(), r = spec.r();
  jac_detail::SeededEnv env;
  env.x = &x_e;
  env.u = &point.u_bar;
  env.p = &point.p_s;
  long dir = 0;
  for (int i = 0; i <= l; ++i, dir += n) env.state_dir.push_back(dir);
  for (int j = 0; j <= r; ++j, dir += k) env.input_dir.push_back(dir);
  Matrix full;
  try {
    jac_detail::run_passes(spec, env, dir, batch, full);
  } catch (const DomainError&) {
    // find the first slot whose seeding alone fails
    for (int s = 0; s <= l + r; ++s) {
      jac_detail::SeededEnv one = env;
      for (int i = 0; i <= l; ++i) if (i != s) one.state_dir[i] = -1;
      for (int j = 0; j <= r; ++j) if (l + 1 + j != s) one.input_dir[j] = -1;
      Matrix scratch;
      try {
        jac_detail::run_passes(spec, one, dir, batch, scratch);
      } catch (const DomainError& inner) {
        std::string slot = s <= l ? "z" + std::to_string(s)
                                  : "w" + std::to_string(s - l - 1);
        throw DomainError(std::string(inner.what()) + " at slot " + slot,
                          inner.span(), inner.equation());
      }
    }
    throw;
  }
  SlotJacobians out;
  for (int i = 0; i <= l; ++i) out.A.push_back(full.middleCols(i * n, n));
  long off = static_cast<long>(l + 1) * n;
  for (int j = 0; j <= r; ++j) out.B.push_back(full.middleCols(off + j * k, k));
  return out;
}

/// d f / d p_s at E (n x p).
inline Matrix jacobian_params(const ModelSpec& spec, const Vector& x_e,
                              const ParameterPoint& point,
                              std::size_t batch = 0) {
  jac_detail::SeededEnv env;
  env.x = &x_e;
  env.u = &point.u_bar;
  env.p = &point.p_s;
  env.state_dir.assign(spec.l() + 1, -1);
  env.input_dir.assign(spec.r() + 1, -1);
  env.param_dir = 0;
  Matrix jac;
  jac_detail::run_passes(spec, env, spec.p(), batch, jac);
  return jac;
}

/// Derivative of x -> f(x,..,x, u,..,u, p): every state slot seeded with the
/// same direction. Equals the sum of the slot Jacobians A_i.
inline Matrix jacobian_tied(const ModelSpec& spec, const Vector& x,
                            const Vector& u, const Vector& p_s) {
  jac_detail::SeededEnv env;
  env.x = &x;
  env.u = &u;
  env.p = &p_s;
  env.tie_states = true;
  env.input_dir.assign(spec.r() + 1, -1);
  Matrix jac;
  jac_detail::run_passes(spec, env, spec.n(), 0, jac);
  return jac;
}

}  // namespace ddeid
