#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "ddeid/linearize.hpp"

namespace ddeid {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

class BranchError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// z on the principal-branch cut of Log: zero or the closed negative real axis.
inline bool on_branch_cut(Complex z) {
  return z == Complex(0.0, 0.0) || (z.imag() == 0.0 && z.real() < 0.0);
}

/// z^tau on the principal branch, exp(tau Log z). tau = 0 gives exactly 1.
inline Complex principal_power(Complex z, double tau) {
  if (tau == 0.0) return {1.0, 0.0};
  if (on_branch_cut(z)) {
    throw BranchError("z^tau undefined on the principal branch cut");
  }
  return std::exp(tau * std::log(z));
}

/// sum_i M_i z^{tag_i}.
inline ComplexMatrix delay_poly(const std::vector<TaggedMatrix>& terms,
                                Complex z) {
  if (terms.empty()) throw std::invalid_argument("delay_poly: no terms");
  ComplexMatrix out =
      ComplexMatrix::Zero(terms[0].m.rows(), terms[0].m.cols());
  for (const auto& t : terms) {
    if (t.delay == 0.0) {
      out += t.m.cast<Complex>();
    } else {
      out += principal_power(z, t.delay) * t.m.cast<Complex>();
    }
  }
  return out;
}

/// [B(z) | A(z) B(z) | ... | A(z)^{n-1} B(z)], n x (n k).
inline ComplexMatrix kalman_block(const LinearDelayModel& model, Complex z) {
  const int n = model.n(), k = model.k();
  ComplexMatrix a = delay_poly(model.A, z);
  ComplexMatrix block(n, static_cast<Eigen::Index>(n) * k);
  if (k == 0) return block;
  ComplexMatrix term = delay_poly(model.B, z);
  for (int q = 0; q < n; ++q) {
    block.middleCols(static_cast<Eigen::Index>(q) * k, k) = term;
    if (q + 1 < n) term = a * term;
  }
  return block;
}

struct NumericalRank {
  int rank = 0;
  Vector singular_values;  // descending
  double threshold = 0.0;
};

/// Rank = number of singular values above rel_tol * max(rows, cols) * s_max.
template <class Derived>
NumericalRank numerical_rank(const Eigen::MatrixBase<Derived>& m,
                             double rel_tol = 1e-10) {
  NumericalRank out;
  if (m.rows() == 0 || m.cols() == 0) {
    out.singular_values = Vector(0);
    return out;
  }
  using Plain = typename Derived::PlainObject;
  Eigen::JacobiSVD<Plain> svd(m.eval());
  out.singular_values = svd.singularValues();
  double smax = out.singular_values.size() ? out.singular_values[0] : 0.0;
  if (smax == 0.0) return out;
  out.threshold =
      rel_tol * static_cast<double>(std::max(m.rows(), m.cols())) * smax;
  for (Eigen::Index i = 0; i < out.singular_values.size(); ++i) {
    if (out.singular_values[i] > out.threshold) ++out.rank;
  }
  return out;
}

struct RankSample {
  Complex z;
  int rank = 0;
  Vector singular_values;
  double threshold = 0.0;
};

struct RankVerdict {
  std::vector<RankSample> per_z;
  bool identifiable = false;
  std::optional<Complex> z_witness;
  int n = 0;
  double rel_tol = 0.0;
  std::vector<std::string> notes;
};

struct ZSampling {
  int random_count = 14;
  double radius_lo = 0.5;
  double radius_hi = 3.0;
  double arg_margin = 0.1;
  std::uint64_t seed = 2;
  std::vector<Complex> extra;  // user-supplied, appended after the defaults
};

/// {2, 1+i}, then `random_count` seeded points in the annulus sector, then
/// any extra user values.
inline std::vector<Complex> default_z_samples(const ZSampling& cfg) {
  std::vector<Complex> out = {Complex(2.0, 0.0), Complex(1.0, 1.0)};
  std::mt19937_64 rng(cfg.seed);
  const double pi = std::acos(-1.0);
  std::uniform_real_distribution<double> radius(cfg.radius_lo, cfg.radius_hi);
  std::uniform_real_distribution<double> arg(-pi + cfg.arg_margin,
                                             pi - cfg.arg_margin);
  for (int i = 0; i < cfg.random_count; ++i) {
    double rr = radius(rng);
    double th = arg(rng);
    out.push_back(std::polar(rr, th));
  }
  out.insert(out.end(), cfg.extra.begin(), cfg.extra.end());
  return out;
}

/// Evaluates the rank condition at every sample. identifiable is set as soon
/// as one sample reaches rank n; failure everywhere is inconclusive.
inline RankVerdict sweep_rank(const LinearDelayModel& model,
                              const std::vector<Complex>& z_samples,
                              double rel_tol = 1e-10) {
  if (z_samples.empty()) throw std::invalid_argument("sweep_rank: no samples");
  RankVerdict v;
  v.n = model.n();
  v.rel_tol = rel_tol;
  for (const Complex& z : z_samples) {
    ComplexMatrix block;
    try {
      block = kalman_block(model, z);
    } catch (const BranchError& e) {
      v.notes.push_back("skipped z = (" + std::to_string(z.real()) + ", " +
                        std::to_string(z.imag()) + "): " + e.what());
      continue;
    }
    NumericalRank nr = numerical_rank(block, rel_tol);
    v.per_z.push_back({z, nr.rank, nr.singular_values, nr.threshold});
    if (nr.rank == v.n && !v.z_witness) {
      v.identifiable = true;
      v.z_witness = z;
    }
  }
  return v;
}

}  // namespace ddeid
