#pragma once

#include <stdexcept>
#include <vector>

#include "ddeid/jacobian.hpp"
#include "ddeid/model.hpp"

namespace ddeid {

/// Matrix multiplying a signal delayed by `delay` (0 for the undelayed term).
struct TaggedMatrix {
  double delay = 0.0;
  Matrix m;
};

/// xi'(t) = sum_i A_i xi(t - tau_i) + sum_j B_j nu(t - nu_j), with tau_0 =
/// nu_0 = 0. Keeps the equilibrium and u_bar it was built around.
struct LinearDelayModel {
  std::vector<TaggedMatrix> A;
  std::vector<TaggedMatrix> B;
  EquilibriumPoint equilibrium;
  Vector u_bar;

  int n() const { return A.empty() ? 0 : static_cast<int>(A[0].m.rows()); }
  int k() const { return B.empty() ? 0 : static_cast<int>(B[0].m.cols()); }
  std::vector<double> state_delays() const {
    std::vector<double> d;
    for (std::size_t i = 1; i < A.size(); ++i) d.push_back(A[i].delay);
    return d;
  }
  std::vector<double> input_delays() const {
    std::vector<double> d;
    for (std::size_t i = 1; i < B.size(); ++i) d.push_back(B[i].delay);
    return d;
  }
};

inline LinearDelayModel linearize(const ModelSpec& spec,
                                  const ParameterPoint& point,
                                  const EquilibriumPoint& eq) {
  if (!eq.converged) {
    throw std::invalid_argument("linearize: equilibrium did not converge");
  }
  SlotJacobians j = jacobian_slots(spec, eq.x_e, point);
  LinearDelayModel out;
  for (int i = 0; i <= spec.l(); ++i) {
    out.A.push_back({i == 0 ? 0.0 : point.tau[i - 1], j.A[i]});
  }
  for (int i = 0; i <= spec.r(); ++i) {
    out.B.push_back({i == 0 ? 0.0 : point.nu[i - 1], j.B[i]});
  }
  out.equilibrium = eq;
  out.u_bar = point.u_bar;
  return out;
}

/// Vectorized coefficients (A_0..A_l, then B_0..B_r, each row-major).
inline Vector coefficient_vector(const LinearDelayModel& m) {
  Eigen::Index total = 0;
  for (const auto& t : m.A) total += t.m.size();
  for (const auto& t : m.B) total += t.m.size();
  Vector v(total);
  Eigen::Index at = 0;
  auto push = [&](const Matrix& x) {
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index c = 0; c < x.cols(); ++c) v[at++] = x(i, c);
  };
  for (const auto& t : m.A) push(t.m);
  for (const auto& t : m.B) push(t.m);
  return v;
}

/// Labels matching coefficient_vector, e.g. "A0[1,2]" (1-based).
inline std::vector<std::string> coefficient_labels(int n, int k, int l, int r) {
  std::vector<std::string> out;
  auto push = [&](const std::string& name, int rows, int cols) {
    for (int i = 0; i < rows; ++i)
      for (int c = 0; c < cols; ++c)
        out.push_back(name + "[" + std::to_string(i + 1) + "," +
                      std::to_string(c + 1) + "]");
  };
  for (int i = 0; i <= l; ++i) push("A" + std::to_string(i), n, n);
  for (int j = 0; j <= r; ++j) push("B" + std::to_string(j), n, k);
  return out;
}

}  // namespace ddeid
