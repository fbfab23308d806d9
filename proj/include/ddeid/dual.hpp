#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ddeid/expr.hpp"

namespace ddeid {

/// Forward-mode dual number with a vector of directional derivatives.
/// An empty derivative vector stands for all-zero (constants).
struct Dual {
  double re = 0.0;
  std::vector<double> d;

  Dual() = default;
  Dual(double v) : re(v) {}  // NOLINT: constants convert implicitly
  Dual(double v, std::vector<double> dirs) : re(v), d(std::move(dirs)) {}

  /// Seed: value v with unit derivative along direction `dir` of `count`.
  static Dual variable(double v, std::size_t dir, std::size_t count) {
    Dual x(v, std::vector<double>(count, 0.0));
    x.d[dir] = 1.0;
    return x;
  }

  double der(std::size_t i) const { return i < d.size() ? d[i] : 0.0; }
};

inline double value_of(const Dual& x) { return x.re; }

namespace dual_detail {

// out.d = a * x.d + b * y.d
inline std::vector<double> combine(double a, const std::vector<double>& x,
                                   double b, const std::vector<double>& y) {
  if (x.empty() && y.empty()) return {};
  std::size_t m = x.size() > y.size() ? x.size() : y.size();
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i];
  for (std::size_t i = 0; i < y.size(); ++i) out[i] += b * y[i];
  return out;
}

inline std::vector<double> scale(double a, const std::vector<double>& x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i];
  return out;
}

}  // namespace dual_detail

inline Dual operator-(const Dual& a) {
  return {-a.re, dual_detail::scale(-1.0, a.d)};
}

inline Dual operator+(const Dual& a, const Dual& b) {
  return {a.re + b.re, dual_detail::combine(1.0, a.d, 1.0, b.d)};
}

inline Dual operator-(const Dual& a, const Dual& b) {
  return {a.re - b.re, dual_detail::combine(1.0, a.d, -1.0, b.d)};
}

inline Dual operator*(const Dual& a, const Dual& b) {
  // (ab)' = a b' + b a'
  return {a.re * b.re, dual_detail::combine(b.re, a.d, a.re, b.d)};
}

inline Dual operator/(const Dual& a, const Dual& b) {
  double inv = 1.0 / b.re;
  double q = a.re * inv;
  return {q, dual_detail::combine(inv, a.d, -q * inv, b.d)};
}

inline Dual sin(const Dual& a) {
  return {std::sin(a.re), dual_detail::scale(std::cos(a.re), a.d)};
}

inline Dual cos(const Dual& a) {
  return {std::cos(a.re), dual_detail::scale(-std::sin(a.re), a.d)};
}

inline Dual exp(const Dual& a) {
  double e = std::exp(a.re);
  return {e, dual_detail::scale(e, a.d)};
}

inline Dual log(const Dual& a) {
  return {std::log(a.re), dual_detail::scale(1.0 / a.re, a.d)};
}

inline bool has_derivative(const Dual& a) {
  for (double v : a.d)
    if (v != 0.0) return true;
  return false;
}

/// |x| differentiates as sign(x); undefined at 0 whenever a derivative is
/// being propagated.
inline Dual checked_abs(const Dual& a, SourceSpan s) {
  if (a.re == 0.0 && has_derivative(a)) {
    throw DomainError("abs is not differentiable at 0", s);
  }
  double sign = a.re < 0.0 ? -1.0 : 1.0;
  return {std::abs(a.re), dual_detail::scale(sign, a.d)};
}

inline Dual checked_sqrt(const Dual& a, SourceSpan s) {
  if (a.re < 0.0) throw DomainError("sqrt of negative value", s);
  if (a.re == 0.0 && has_derivative(a)) {
    throw DomainError("sqrt is not differentiable at 0", s);
  }
  double r = std::sqrt(a.re);
  return {r, dual_detail::scale(r == 0.0 ? 0.0 : 0.5 / r, a.d)};
}

}  // namespace ddeid
