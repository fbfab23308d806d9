#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "ddeid/equilibrium.hpp"
#include "ddeid/linearize.hpp"
#include "ddeid/rank.hpp"

namespace ddeid {

/// Sensitivity of the vectorized coefficients (A_0..A_l, B_0..B_r) to the
/// physical parameters p_s, each column a central difference of the full
/// equilibrium -> linearize pipeline.
struct CoeffMapJacobian {
  Matrix J;                              // rows = coefficients, cols = p
  std::vector<std::string> row_labels;
  std::vector<std::string> column_failures;  // per column, empty if fine
  double step = 1e-6;
};

/// Re-solves the equilibrium by tracking from `eq.x_e` for every perturbed
/// parameter, so equilibria that move with p_s are differentiated totally.
inline CoeffMapJacobian coeff_map_jacobian(const ModelSpec& spec,
                                           const ParameterPoint& point,
                                           const EquilibriumPoint& eq,
                                           const SolverConfig& solver = {},
                                           double step = 1e-6) {
  CoeffMapJacobian out;
  out.step = step;
  out.row_labels =
      coefficient_labels(spec.n(), spec.k(), spec.l(), spec.r());
  const Eigen::Index rows = static_cast<Eigen::Index>(out.row_labels.size());
  out.J = Matrix::Zero(rows, spec.p());
  out.column_failures.assign(spec.p(), "");
  for (int c = 0; c < spec.p(); ++c) {
    Vector side[2];
    bool ok = true;
    for (int s = 0; s < 2; ++s) {
      ParameterPoint q = point;
      q.p_s[c] += s == 0 ? step : -step;
      NewtonResult r = newton_solve(spec, q, eq.x_e, solver);
      if (!r.converged) {
        out.column_failures[c] =
            "equilibrium tracking failed for " + spec.param_names[c] + ": " +
            r.failure;
        ok = false;
        break;
      }
      if ((r.x - eq.x_e).lpNorm<Eigen::Infinity>() > 1e-3) {
        out.column_failures[c] = "equilibrium jumped branch while perturbing " +
                                 spec.param_names[c];
        ok = false;
        break;
      }
      EquilibriumPoint e{r.x, r.residual, true};
      try {
        side[s] = coefficient_vector(linearize(spec, q, e));
      } catch (const DomainError& err) {
        out.column_failures[c] = describe(err);
        ok = false;
        break;
      }
    }
    if (!ok) {
      out.J.col(c).setConstant(NAN);
      continue;
    }
    out.J.col(c) = (side[0] - side[1]) / (2.0 * step);
  }
  return out;
}

struct CoeffMapReport {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  int jacobian_rank = 0;
  Vector singular_values;
  double threshold = 0.0;
  double rel_tol = 0.0;
  std::vector<std::vector<std::string>> sensitive_coeffs;  // per parameter
  std::vector<std::string> entangled;  // parameters in the numerical kernel
  bool locally_injective = false;
  std::vector<std::string> notes;
};

/// Full-column-rank test of the coefficient map Jacobian.
inline CoeffMapReport injectivity_verdict(
    const CoeffMapJacobian& cj, const std::vector<std::string>& param_names,
    double rel_tol = 1e-7) {
  CoeffMapReport rep;
  rep.rows = cj.J.rows();
  rep.cols = cj.J.cols();
  rep.rel_tol = rel_tol;
  rep.sensitive_coeffs.resize(static_cast<std::size_t>(rep.cols));
  for (const auto& f : cj.column_failures)
    if (!f.empty()) rep.notes.push_back(f);
  if (rep.cols == 0) {
    rep.locally_injective = true;
    rep.notes.push_back("no physical parameters: injectivity holds vacuously");
    return rep;
  }
  if (!rep.notes.empty() || !cj.J.allFinite()) {
    rep.locally_injective = false;
    return rep;
  }
  NumericalRank nr = numerical_rank(cj.J, rel_tol);
  rep.jacobian_rank = nr.rank;
  rep.singular_values = nr.singular_values;
  rep.threshold = nr.threshold;
  rep.locally_injective = nr.rank == rep.cols;

  // entries above the rank threshold count as sensitive
  for (Eigen::Index c = 0; c < rep.cols; ++c) {
    for (Eigen::Index i = 0; i < rep.rows; ++i) {
      if (std::abs(cj.J(i, c)) > std::max(nr.threshold, 1e-12)) {
        rep.sensitive_coeffs[static_cast<std::size_t>(c)].push_back(
            cj.row_labels[static_cast<std::size_t>(i)]);
      }
    }
  }
  if (!rep.locally_injective) {
    Eigen::JacobiSVD<Matrix> svd(cj.J, Eigen::ComputeFullV);
    const Matrix& v = svd.matrixV();
    std::vector<bool> flagged(static_cast<std::size_t>(rep.cols), false);
    for (Eigen::Index s = nr.rank; s < rep.cols; ++s) {
      for (Eigen::Index c = 0; c < rep.cols; ++c) {
        if (std::abs(v(c, s)) > 1e-6) flagged[static_cast<std::size_t>(c)] = true;
      }
    }
    for (Eigen::Index c = 0; c < rep.cols; ++c) {
      if (flagged[static_cast<std::size_t>(c)])
        rep.entangled.push_back(param_names[static_cast<std::size_t>(c)]);
    }
  }
  return rep;
}

}  // namespace ddeid
