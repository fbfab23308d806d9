#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddeid/linearize.hpp"
#include "ddeid/model.hpp"
#include "ddeid/signal.hpp"

namespace ddeid {

using History = std::function<Vector(double)>;

inline History constant_history(const Vector& x) {
  return [x](double) { return x; };
}

/// Fixed-step RK4 solution with a cubic Hermite dense output per step.
///
/// The Hermite data of step i use the right-sided slope at t_i and the
/// left-sided slope at t_{i+1}, so input switches on grid points keep their
/// one-sided limits.
struct Trajectory {
  double h = 0.0;
  double T = 0.0;
  std::vector<double> t;
  std::vector<Vector> x;
  std::vector<Vector> slope_right;  // slope at t_i+ (size = steps)
  std::vector<Vector> slope_left;   // slope at t_{i+1}- (size = steps)
  std::vector<Vector> u;            // input at grid points (right-sided)
  History history;
  double history_span = 0.0;        // history covers [-history_span, 0]
  std::vector<double> history_t;    // sampled history on the grid
  std::vector<Vector> history_x;
  InputSignal input;                // the (snapped) signal actually used
  bool truncated = false;
  std::string diagnostic;

  std::size_t steps() const { return slope_right.size(); }
  int dim() const { return x.empty() ? 0 : static_cast<int>(x[0].size()); }

  /// Dense value at time s in [-history_span, t.back()].
  Vector at(double s) const {
    if (s <= 0.0) return history(s);
    if (steps() == 0) return x.back();
    double pos = s / h;
    auto i = static_cast<std::size_t>(std::floor(pos));
    if (i >= steps()) {
      if (s <= t.back() + 1e-12 * h) return x.back();
      throw std::out_of_range("Trajectory::at beyond computed range");
    }
    double theta = (s - t[i]) / h;
    // exact grid hits return the stored sample
    if (theta == 0.0) return x[i];
    double t2 = theta * theta, t3 = t2 * theta;
    double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + theta;
    double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * x[i] + h10 * h * slope_right[i] + h01 * x[i + 1] +
           h11 * h * slope_left[i];
  }
};

/// Right-hand side in slot form: z = (x(t), x(t - tau_1), ...),
/// w = (u(t), u(t - nu_1), ...).
using SlotRhs =
    std::function<Vector(const std::vector<Vector>& z, const std::vector<Vector>& w)>;

struct DelaySystem {
  int n = 0;
  std::vector<double> state_delays;
  std::vector<double> input_delays;
  SlotRhs rhs;
};

namespace sim_detail {

inline void fill_slots(const DelaySystem& sys, const Trajectory& traj,
                       double t, Side side, const Vector& x_now,
                       std::vector<Vector>& z, std::vector<Vector>& w) {
  z[0] = x_now;
  for (std::size_t i = 0; i < sys.state_delays.size(); ++i)
    z[i + 1] = traj.at(t - sys.state_delays[i]);
  w[0] = traj.input.value(t, side);
  for (std::size_t j = 0; j < sys.input_delays.size(); ++j)
    w[j + 1] = traj.input.value(t - sys.input_delays[j], side);
}

}  // namespace sim_detail

/// Method-of-steps integration on the uniform grid t_i = i h, i = 0..N with
/// N = round(T / h). Input switches are snapped to the grid first.
inline Trajectory integrate(const DelaySystem& sys, const History& phi,
                            const InputSignal& input, double T, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("integrate: h must be > 0");
  if (!(T > 0.0)) throw std::invalid_argument("integrate: T must be > 0");
  for (double d : sys.state_delays) {
    if (d < h) {
      throw std::invalid_argument(
          "integrate: state delay smaller than the step (grid too coarse)");
    }
  }
  Trajectory traj;
  traj.h = h;
  traj.history = phi;
  traj.input = input.snapped(h);
  double span = 0.0;
  for (double d : sys.state_delays) span = std::max(span, d);
  traj.history_span = span;
  const long hist_steps = static_cast<long>(std::ceil(span / h - 1e-9));
  for (long i = -hist_steps; i <= 0; ++i) {
    double s = std::max(static_cast<double>(i) * h, -span);
    traj.history_t.push_back(s);
    traj.history_x.push_back(phi(s));
  }

  const long N = std::max<long>(1, std::lround(T / h));
  traj.T = static_cast<double>(N) * h;
  traj.t.reserve(static_cast<std::size_t>(N) + 1);
  traj.x.reserve(static_cast<std::size_t>(N) + 1);
  traj.t.push_back(0.0);
  traj.x.push_back(phi(0.0));
  traj.u.push_back(traj.input.value(0.0));

  std::vector<Vector> z(sys.state_delays.size() + 1);
  std::vector<Vector> w(sys.input_delays.size() + 1);
  auto eval = [&](double t, Side side, const Vector& xs) {
    sim_detail::fill_slots(sys, traj, t, side, xs, z, w);
    return sys.rhs(z, w);
  };

  for (long i = 0; i < N; ++i) {
    const double t0 = static_cast<double>(i) * h;
    const double t1 = static_cast<double>(i + 1) * h;
    const double tm = t0 + 0.5 * h;
    const Vector& x0 = traj.x.back();
    Vector k1 = eval(t0, Side::Right, x0);
    // stages at t0 + h/2 read the dense output of completed steps only,
    // since every state delay is >= h
    Vector k2 = eval(tm, Side::Right, x0 + 0.5 * h * k1);
    Vector k3 = eval(tm, Side::Right, x0 + 0.5 * h * k2);
    Vector k4 = eval(t1, Side::Left, x0 + h * k3);
    Vector x1 = x0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x1.allFinite() || !k1.allFinite()) {
      traj.truncated = true;
      traj.diagnostic = "nonfinite state at t = " + std::to_string(t1) +
                        "; trajectory truncated";
      break;
    }
    traj.slope_right.push_back(k1);
    traj.t.push_back(t1);
    traj.x.push_back(x1);
    traj.slope_left.push_back(eval(t1, Side::Left, x1));
    traj.u.push_back(traj.input.value(t1));
  }
  if (traj.truncated) traj.T = traj.t.back();
  return traj;
}

/// Nonlinear model driven by u from the history phi.
inline Trajectory simulate_nonlinear(const ModelSpec& spec,
                                     const ParameterPoint& point,
                                     const History& phi,
                                     const InputSignal& u, double T, double h) {
  if (u.channels() != spec.k())
    throw std::invalid_argument("simulate_nonlinear: input channel mismatch");
  DelaySystem sys;
  sys.n = spec.n();
  for (Eigen::Index i = 0; i < point.tau.size(); ++i)
    sys.state_delays.push_back(point.tau[i]);
  for (Eigen::Index i = 0; i < point.nu.size(); ++i)
    sys.input_delays.push_back(point.nu[i]);
  const Vector p_s = point.p_s;
  sys.rhs = [&spec, p_s](const std::vector<Vector>& z,
                         const std::vector<Vector>& w) {
    VectorSlotEnv env{&z, &w, &p_s};
    Vector out(spec.n());
    for (int i = 0; i < spec.n(); ++i) {
      try {
        out[i] = evaluate<double>(spec.equations[i], env);
      } catch (const DomainError&) {
        out[i] = NAN;
      }
    }
    return out;
  };
  return integrate(sys, phi, u, T, h);
}

/// Linear delayed model from zero history, driven by the perturbation nu.
inline Trajectory simulate_linear(const LinearDelayModel& model,
                                  const InputSignal& nu, double T, double h) {
  if (nu.channels() != model.k())
    throw std::invalid_argument("simulate_linear: input channel mismatch");
  DelaySystem sys;
  sys.n = model.n();
  sys.state_delays = model.state_delays();
  sys.input_delays = model.input_delays();
  sys.rhs = [&model](const std::vector<Vector>& z,
                     const std::vector<Vector>& w) {
    Vector out = Vector::Zero(model.n());
    for (std::size_t i = 0; i < model.A.size(); ++i) out += model.A[i].m * z[i];
    for (std::size_t j = 0; j < model.B.size(); ++j) out += model.B[j].m * w[j];
    return out;
  };
  return integrate(sys, constant_history(Vector::Zero(model.n())), nu, T, h);
}

}  // namespace ddeid
