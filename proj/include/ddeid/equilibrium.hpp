#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ddeid/jacobian.hpp"
#include "ddeid/model.hpp"

namespace ddeid {

struct SolverConfig {
  double tol_residual = 1e-12;
  int max_iters = 100;
  int n_starts = 8;
  double box_lo = -2.0;  // start box, same interval for every coordinate
  double box_hi = 2.0;
  double damping = 0.5;
  int max_backtracks = 30;
  std::uint64_t seed = 1;

  std::vector<std::string> problems() const {
    std::vector<std::string> out;
    if (!(tol_residual > 0.0)) out.push_back("solver tolerance must be > 0");
    if (max_iters < 1) out.push_back("solver max_iters must be >= 1");
    if (n_starts < 1) out.push_back("solver starts must be >= 1");
    if (!(box_lo <= box_hi)) out.push_back("solver start box is empty");
    if (!(damping > 0.0 && damping < 1.0))
      out.push_back("solver damping must lie in (0, 1)");
    if (max_backtracks < 0) out.push_back("solver max_backtracks must be >= 0");
    return out;
  }
};

struct NewtonResult {
  Vector x;
  double residual = 0.0;  // max-norm
  int iterations = 0;
  int gradient_steps = 0;  // singular-Jacobian fallbacks
  bool converged = false;
  std::string failure;
};

struct StartRecord {
  Vector start;
  NewtonResult result;
};

struct EquilibriumSearch {
  std::vector<EquilibriumPoint> equilibria;  // sorted lexicographically
  std::vector<StartRecord> starts;
};

inline double residual_max_norm(const ModelSpec& spec, const Vector& x,
                                const ParameterPoint& point) {
  return eval_tied(spec, x, point.u_bar, point.p_s).lpNorm<Eigen::Infinity>();
}

/// Damped Newton on x -> f(x,..,x, u_bar,..,u_bar, p) from one start.
inline NewtonResult newton_solve(const ModelSpec& spec,
                                 const ParameterPoint& point, const Vector& x0,
                                 const SolverConfig& cfg) {
  NewtonResult res;
  res.x = x0;
  Vector f;
  try {
    f = eval_tied(spec, res.x, point.u_bar, point.p_s);
  } catch (const DomainError& e) {
    res.failure = std::string("domain error at start: ") + e.what();
    res.residual = INFINITY;
    return res;
  }
  auto merit = [](const Vector& v) { return 0.5 * v.squaredNorm(); };
  res.residual = f.lpNorm<Eigen::Infinity>();
  for (res.iterations = 0; res.iterations < cfg.max_iters; ++res.iterations) {
    if (!std::isfinite(res.residual)) {
      res.failure = "nonfinite residual";
      return res;
    }
    if (res.residual <= cfg.tol_residual) {
      res.converged = true;
      return res;
    }
    Matrix J;
    try {
      J = jacobian_tied(spec, res.x, point.u_bar, point.p_s);
    } catch (const DomainError& e) {
      res.failure = std::string("domain error in Jacobian: ") + e.what();
      return res;
    }
    Eigen::FullPivLU<Matrix> lu(J);
    Vector dir;
    bool gradient = false;
    if (lu.isInvertible()) {
      dir = lu.solve(-f);
    } else {
      dir = -(J.transpose() * f);
      gradient = true;
      ++res.gradient_steps;
    }
    if (!dir.allFinite() || dir.squaredNorm() == 0.0) {
      res.failure = "no descent direction";
      return res;
    }
    double m0 = merit(f);
    double t = 1.0;
    Vector trial;
    Vector ft;
    bool accepted = false;
    for (int b = 0; b <= cfg.max_backtracks; ++b) {
      trial = res.x + t * dir;
      try {
        ft = eval_tied(spec, trial, point.u_bar, point.p_s);
        if (ft.allFinite() && merit(ft) < m0) {
          accepted = true;
          break;
        }
      } catch (const DomainError&) {
      }
      t *= cfg.damping;
    }
    if (!accepted) {
      // a full Newton step that cannot reduce the merit only happens at
      // the rounding floor; accept it once to let the residual test decide
      if (!gradient && ft.size() && ft.allFinite() &&
          ft.lpNorm<Eigen::Infinity>() <= cfg.tol_residual) {
        res.x = trial;
        f = ft;
        res.residual = f.lpNorm<Eigen::Infinity>();
        continue;
      }
      res.failure = "line search failed";
      return res;
    }
    res.x = trial;
    f = ft;
    res.residual = f.lpNorm<Eigen::Infinity>();
  }
  if (res.residual <= cfg.tol_residual) {
    res.converged = true;
  } else {
    res.failure = "iteration limit reached";
  }
  return res;
}

inline bool lex_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

/// Multi-start search with clustering of distinct solutions (max-norm
/// separation > 1e-6). Deterministic for a fixed seed.
inline EquilibriumSearch find_equilibria(const ModelSpec& spec,
                                         const ParameterPoint& point,
                                         const SolverConfig& cfg) {
  EquilibriumSearch out;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> box(cfg.box_lo, cfg.box_hi);
  std::vector<Vector> found;
  for (int s = 0; s < cfg.n_starts; ++s) {
    Vector x0(spec.n());
    for (int i = 0; i < spec.n(); ++i) x0[i] = box(rng);
    NewtonResult r = newton_solve(spec, point, x0, cfg);
    if (r.converged) found.push_back(r.x);
    out.starts.push_back({x0, std::move(r)});
  }
  std::sort(found.begin(), found.end(), lex_less);
  for (const Vector& x : found) {
    bool distinct = true;
    for (const auto& e : out.equilibria) {
      if ((e.x_e - x).lpNorm<Eigen::Infinity>() <= 1e-6) distinct = false;
    }
    if (!distinct) continue;
    EquilibriumPoint e;
    e.x_e = x;
    e.residual_norm = residual_max_norm(spec, x, point);
    e.converged = e.residual_norm <= cfg.tol_residual;
    out.equilibria.push_back(e);
  }
  return out;
}

}  // namespace ddeid
