#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "testing.hpp"

using namespace ddeid;
using ddeid::testing::model_from;

namespace {

EquilibriumPoint first_equilibrium(const ModelFile& f) {
  auto s = find_equilibria(f.spec, f.nominal, SolverConfig{});
  EXPECT_FALSE(s.equilibria.empty());
  return s.equilibria.at(0);
}

int row_of(const CoeffMapJacobian& cj, const std::string& label) {
  auto it = std::find(cj.row_labels.begin(), cj.row_labels.end(), label);
  EXPECT_NE(it, cj.row_labels.end()) << label;
  return static_cast<int>(it - cj.row_labels.begin());
}

// Sensitivity matrix built in the test: its own step, its own Newton
// tracking, and a QR rank instead of the SVD one.
int oracle_rank(const ModelFile& f, const EquilibriumPoint& eq) {
  const double h = 1e-5;
  Matrix S(coefficient_vector(linearize(f.spec, f.nominal, eq)).size(), f.spec.p());
  for (int c = 0; c < f.spec.p(); ++c) {
    Vector side[2];
    for (int s = 0; s < 2; ++s) {
      ParameterPoint q = f.nominal;
      q.p_s[c] += s == 0 ? h : -h;
      Vector x = eq.x_e;
      for (int it = 0; it < 50; ++it) {
        Vector r = eval_tied(f.spec, x, q.u_bar, q.p_s);
        if (r.lpNorm<Eigen::Infinity>() < 1e-13) break;
        x -= jacobian_tied(f.spec, x, q.u_bar, q.p_s).lu().solve(r);
      }
      side[s] = coefficient_vector(linearize(f.spec, q, EquilibriumPoint{x, 0.0, true}));
    }
    S.col(c) = (side[0] - side[1]) / (2 * h);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(S);
  qr.setThreshold(1e-6);
  return static_cast<int>(qr.rank());
}

const char* kProduct = R"(
[states]
x
[inputs]
u = 1
[params]
p1 = 2
p2 = -0.5
[equations]
dx = (p1*p2)*x + u
)";

}  // namespace

TEST(CoeffMap, ProductParametersAreEntangled) {
  ModelFile f = model_from(kProduct);
  EquilibriumPoint eq = first_equilibrium(f);
  EXPECT_NEAR(eq.x_e[0], 1.0, 1e-12);
  CoeffMapJacobian cj = coeff_map_jacobian(f.spec, f.nominal, eq);
  // A0 = p1 p2, so both columns are multiples of the same coefficient row
  EXPECT_NEAR(cj.J(row_of(cj, "A0[1,1]"), 0), -0.5, 1e-8);
  EXPECT_NEAR(cj.J(row_of(cj, "A0[1,1]"), 1), 2.0, 1e-8);
  CoeffMapReport rep = injectivity_verdict(cj, f.spec.param_names);
  EXPECT_EQ(rep.jacobian_rank, 1);
  EXPECT_FALSE(rep.locally_injective);
  EXPECT_EQ(rep.entangled, (std::vector<std::string>{"p1", "p2"}));
}

TEST(CoeffMap, ZeroParametersIsVacuous) {
  ModelFile f = ddeid::testing::bundled("eq16.model");
  EquilibriumPoint eq = first_equilibrium(f);
  CoeffMapJacobian cj = coeff_map_jacobian(f.spec, f.nominal, eq);
  EXPECT_EQ(cj.J.cols(), 0);
  EXPECT_EQ(cj.J.rows(), 5 * 16 + 8);
  CoeffMapReport rep = injectivity_verdict(cj, f.spec.param_names);
  EXPECT_TRUE(rep.locally_injective);
  EXPECT_FALSE(rep.notes.empty());
}

TEST(CoeffMap, ParameterizedExampleThirdParameter) {
  ModelFile f = ddeid::testing::bundled("eq17.model");
  EquilibriumPoint eq = first_equilibrium(f);
  ASSERT_GT(std::abs(eq.x_e[0]), 0.1);
  CoeffMapJacobian cj = coeff_map_jacobian(f.spec, f.nominal, eq);
  EXPECT_NEAR(cj.J(row_of(cj, "A1[1,1]"), 2), 2 * eq.x_e[0], 1e-7);
  EXPECT_GT(cj.J.col(2).norm(), 0.1);
}

TEST(CoeffMap, ParameterizedExampleFullColumnRank) {
  ModelFile f = ddeid::testing::bundled("eq17.model");
  EquilibriumPoint eq = first_equilibrium(f);
  CoeffMapJacobian cj = coeff_map_jacobian(f.spec, f.nominal, eq);
  CoeffMapReport rep = injectivity_verdict(cj, f.spec.param_names);
  EXPECT_EQ(rep.jacobian_rank, 13);
  EXPECT_TRUE(rep.locally_injective);
  EXPECT_TRUE(rep.entangled.empty());
  EXPECT_EQ(oracle_rank(f, eq), 13);
  for (const auto& s : rep.sensitive_coeffs) EXPECT_FALSE(s.empty());
}

TEST(CoeffMap, RescalingAParameter) {
  ModelFile f = ddeid::testing::bundled("eq17.model");
  std::string text = f.source;
  const std::string from = "p3*delay(x, tau1)^2";
  auto at = text.find(from);
  ASSERT_NE(at, std::string::npos);
  text.replace(at, from.size(), "4*p3*delay(x, tau1)^2");
  ModelFile g = model_from(text);
  g.nominal.p_s[2] = f.nominal.p_s[2] / 4;

  EquilibriumPoint ef = first_equilibrium(f), eg = first_equilibrium(g);
  CoeffMapJacobian jf = coeff_map_jacobian(f.spec, f.nominal, ef);
  CoeffMapJacobian jg = coeff_map_jacobian(g.spec, g.nominal, eg);
  EXPECT_LE((jg.J.col(2) - 4 * jf.J.col(2)).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_EQ(injectivity_verdict(jf, f.spec.param_names).jacobian_rank,
            injectivity_verdict(jg, g.spec.param_names).jacobian_rank);
}

TEST(CoeffMap, VerdictIgnoresRowOrder) {
  ModelFile f = ddeid::testing::bundled("eq17.model");
  EquilibriumPoint eq = first_equilibrium(f);
  CoeffMapJacobian cj = coeff_map_jacobian(f.spec, f.nominal, eq);
  CoeffMapJacobian shuffled = cj;
  std::vector<int> order(cj.J.rows());
  for (int i = 0; i < cj.J.rows(); ++i) order[i] = i;
  std::mt19937 rng(3);
  std::shuffle(order.begin(), order.end(), rng);
  for (int i = 0; i < cj.J.rows(); ++i) {
    shuffled.J.row(i) = cj.J.row(order[i]);
    shuffled.row_labels[i] = cj.row_labels[order[i]];
  }
  CoeffMapReport a = injectivity_verdict(cj, f.spec.param_names);
  CoeffMapReport b = injectivity_verdict(shuffled, f.spec.param_names);
  EXPECT_EQ(a.jacobian_rank, b.jacobian_rank);
  EXPECT_EQ(a.locally_injective, b.locally_injective);

  ModelFile p = model_from(kProduct);
  CoeffMapJacobian pj = coeff_map_jacobian(p.spec, p.nominal, first_equilibrium(p));
  pj.J.row(0).swap(pj.J.row(1));
  EXPECT_FALSE(injectivity_verdict(pj, p.spec.param_names).locally_injective);
}

TEST(CoeffMap, TrackingFailureIsReportedPerColumn) {
  ModelFile f = model_from("[states]\nx\n[params]\np = 0\n[equations]\ndx = x^2 + p\n");
  EquilibriumPoint eq{Vector::Zero(1), 0.0, true};
  CoeffMapJacobian cj = coeff_map_jacobian(f.spec, f.nominal, eq);
  ASSERT_EQ(cj.column_failures.size(), 1u);
  EXPECT_FALSE(cj.column_failures[0].empty());
  CoeffMapReport rep = injectivity_verdict(cj, f.spec.param_names);
  EXPECT_FALSE(rep.locally_injective);
  EXPECT_FALSE(rep.notes.empty());
}
