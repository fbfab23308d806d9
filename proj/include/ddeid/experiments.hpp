#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ddeid/linearize.hpp"
#include "ddeid/simulate.hpp"

namespace ddeid {

struct ScalingPoint {
  double eps = 0.0;
  double max_deviation = 0.0;  // max_t |x - x_e|_inf
  double max_remainder = 0.0;  // max_t |x - x_e - xi|_inf
};

struct ScalingReport {
  std::vector<ScalingPoint> points;  // surviving eps values, in input order
  std::vector<double> dropped_eps;
  double slope_deviation = NAN;  // fitted log-log slope of max_deviation
  double slope_remainder = NAN;  // fitted log-log slope of max_remainder
  double input_norm = 0.0;       // L2(0, T) norm of the reference signal
  double T = 0.0;
  double h = 0.0;
  std::vector<std::string> notes;
};

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x,
                           const std::vector<double>& y) {
  const std::size_t m = x.size();
  if (m < 2) return NAN;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  double md = static_cast<double>(m);
  return (md * sxy - sx * sy) / (md * sxx - sx * sx);
}

inline std::vector<double> default_eps_list() { return {1e-1, 3e-2, 1e-2, 3e-3}; }

/// For each eps, drives the nonlinear model with u_bar + (eps/|nu_bar|) nu_bar
/// from the constant history x_e and the linear model with (eps/|nu_bar|)
/// nu_bar, then fits how the deviation and the linearization remainder scale
/// with eps.
inline ScalingReport scaling_experiment(const ModelSpec& spec,
                                        const ParameterPoint& point,
                                        const EquilibriumPoint& eq,
                                        const LinearDelayModel& model,
                                        const InputSignal& nu_bar,
                                        const std::vector<double>& eps_list,
                                        double T, double h) {
  if (eps_list.size() < 3)
    throw std::invalid_argument("scaling_experiment: need at least 3 eps values");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0) || (i > 0 && !(eps_list[i] < eps_list[i - 1])))
      throw std::invalid_argument(
          "scaling_experiment: eps values must be positive and decreasing");
  }
  ScalingReport rep;
  rep.T = T;
  rep.h = h;
  InputSignal reference = nu_bar.snapped(h);
  rep.input_norm = reference.l2_norm(T);
  if (!(rep.input_norm > 0.0))
    throw std::invalid_argument("scaling_experiment: reference input is zero");
  if (!reference.snaps().empty()) {
    rep.notes.push_back(std::to_string(reference.snaps().size()) +
                        " switch times snapped to the grid");
  }
  const Vector zero = Vector::Zero(spec.k());
  std::vector<double> xs, d1, d2;
  for (double eps : eps_list) {
    double c = eps / rep.input_norm;
    InputSignal u = reference.affine(point.u_bar, c);
    InputSignal v = reference.affine(zero, c);
    Trajectory full = simulate_nonlinear(spec, point, constant_history(eq.x_e),
                                         u, T, h);
    Trajectory lin = simulate_linear(model, v, T, h);
    if (full.truncated || lin.truncated) {
      rep.dropped_eps.push_back(eps);
      rep.notes.push_back("eps = " + std::to_string(eps) + " dropped: " +
                          (full.truncated ? full.diagnostic : lin.diagnostic));
      continue;
    }
    ScalingPoint sp{eps, 0.0, 0.0};
    for (std::size_t i = 0; i < full.x.size(); ++i) {
      Vector dev = full.x[i] - eq.x_e;
      sp.max_deviation = std::max(sp.max_deviation, dev.lpNorm<Eigen::Infinity>());
      sp.max_remainder =
          std::max(sp.max_remainder, (dev - lin.x[i]).lpNorm<Eigen::Infinity>());
    }
    rep.points.push_back(sp);
    xs.push_back(eps);
    d1.push_back(sp.max_deviation);
    d2.push_back(sp.max_remainder);
  }
  if (rep.points.size() < 3) {
    rep.notes.push_back("fewer than 3 eps values survived; no slopes fitted");
    return rep;
  }
  rep.slope_deviation = loglog_slope(xs, d1);
  bool positive = true;
  for (double v : d2) positive = positive && v > 0.0;
  if (positive) {
    rep.slope_remainder = loglog_slope(xs, d2);
  } else {
    rep.notes.push_back("linearization remainder vanished; model is linear");
  }
  return rep;
}

struct SeparationReport {
  double l2_gap = 0.0;   // L2(0, T) norm of y_a - y_b (trapezoidal rule)
  double max_gap = 0.0;  // max_t |y_a - y_b|_inf
  bool truncated = false;
  std::vector<std::string> notes;
};

/// Output gap between two parameter points under the same input. A near-zero
/// gap is evidence against identifiability, never a proof.
inline SeparationReport distinguishability_experiment(
    const ModelSpec& spec, const ParameterPoint& a, const ParameterPoint& b,
    const History& phi_a, const History& phi_b, const InputSignal& u, double T,
    double h) {
  Trajectory ta = simulate_nonlinear(spec, a, phi_a, u, T, h);
  Trajectory tb = simulate_nonlinear(spec, b, phi_b, u, T, h);
  SeparationReport rep;
  rep.truncated = ta.truncated || tb.truncated;
  if (rep.truncated) rep.notes.push_back("a simulation was truncated");
  std::size_t m = std::min(ta.x.size(), tb.x.size());
  double acc = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    Vector gap = spec.output_map * (ta.x[i] - tb.x[i]);
    double sq = gap.squaredNorm();
    rep.max_gap = std::max(rep.max_gap, gap.lpNorm<Eigen::Infinity>());
    if (i > 0) acc += 0.5 * h * (sq + prev);
    prev = sq;
  }
  rep.l2_gap = std::sqrt(acc);
  return rep;
}

}  // namespace ddeid
