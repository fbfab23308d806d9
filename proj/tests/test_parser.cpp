#include <string>

#include <gtest/gtest.h>

#include "testing.hpp"

using namespace ddeid;
using ddeid::testing::model_from;

namespace {

const char* kOneState = R"(
[states]
x1
[equations]
dx1 = x1
)";

std::string with_equation(const std::string& rhs) {
  return "[states]\nx1\n[delays]\ntau1 = 1\n[inputs]\nu1\n[params]\np1 = 2\n[equations]\ndx1 = " +
         rhs + "\n";
}

ParseResult parse(const std::string& s) { return parse_model(s); }

}  // namespace

TEST(ParseModel, IdentityEquation) {
  ModelFile f = model_from(kOneState);
  ASSERT_EQ(f.spec.n(), 1);
  const Node& root = f.spec.equations[0].root();
  EXPECT_EQ(root.kind, NodeKind::State);
  EXPECT_EQ(root.index, 0);
  EXPECT_EQ(root.slot, 0);
  EXPECT_TRUE(f.spec.output_map.isIdentity());
}

TEST(ParseModel, FirstLineOfFourStateExample) {
  ModelSpec h = ddeid::testing::four_state_header();
  Expr e = parse_expression("-x + (1 + sin(x)^2)*y + delay(x,tau1)^2", h);
  Expr x = Expr::state(0, 0), y = Expr::state(1, 0), xd = Expr::state(0, 1);
  Expr want = Expr::binary(
      NodeKind::Add,
      Expr::binary(NodeKind::Add, Expr::unary(NodeKind::Neg, x),
                   Expr::binary(NodeKind::Mul,
                                Expr::binary(NodeKind::Add, Expr::constant(1),
                                             Expr::binary(NodeKind::Pow,
                                                          Expr::unary(NodeKind::Sin, x),
                                                          Expr::constant(2))),
                                y)),
      Expr::binary(NodeKind::Pow, xd, Expr::constant(2)));
  EXPECT_TRUE(same_structure(e, want));
}

TEST(ParseModel, StrayPlusIsDiagnosed) {
  const std::string src = "[states]\nx1\n[equations]\ndx1 = 2*+ x1\n";
  ParseResult r = parse(src);
  ASSERT_FALSE(r.ok());
  ASSERT_FALSE(r.diagnostics.empty());
  const Diagnostic& d = r.diagnostics.front();
  EXPECT_EQ(src.substr(d.span.begin, d.span.end - d.span.begin), "+");
  EXPECT_EQ(d.line, 4);
  EXPECT_EQ(d.column, 9);
}

TEST(ParseModel, UnknownIdentifier) {
  ParseResult r = parse(with_equation("x1 + q"));
  ASSERT_FALSE(r.ok());
  EXPECT_NE(r.diagnostics.front().message.find("q"), std::string::npos);
}

TEST(ParseModel, ArityErrors) {
  EXPECT_FALSE(parse(with_equation("sin(x1, x1)")).ok());
  EXPECT_FALSE(parse(with_equation("sin()")).ok());
  EXPECT_FALSE(parse(with_equation("delay(x1)")).ok());
}

TEST(ParseModel, LexicalAndSyntaxErrors) {
  EXPECT_FALSE(parse(with_equation("x1 $ 2")).ok());
  EXPECT_FALSE(parse(with_equation("(x1 + 2")).ok());
  EXPECT_FALSE(parse(with_equation("x1 +")).ok());
  EXPECT_FALSE(parse(with_equation("")).ok());
}

TEST(ParseModel, DelayKindsAndSlots) {
  ModelFile f = model_from(R"(
[states]
a b
[inputs]
u = 0.5
[delays]
t1 = 0.3
n1 = 0.2
t2 = 0.7 in [0.6, 0.8]
[equations]
da = delay(a, t2) + delay(b, t1)
db = delay(u, n1) - u
)");
  ASSERT_EQ(f.spec.l(), 2);
  ASSERT_EQ(f.spec.r(), 1);
  EXPECT_EQ(f.spec.state_delay_names, (std::vector<std::string>{"t1", "t2"}));
  EXPECT_EQ(f.spec.input_delay_names, (std::vector<std::string>{"n1"}));
  EXPECT_DOUBLE_EQ(f.nominal.tau[0], 0.3);
  EXPECT_DOUBLE_EQ(f.nominal.tau[1], 0.7);
  EXPECT_DOUBLE_EQ(f.nominal.nu[0], 0.2);
  EXPECT_DOUBLE_EQ(f.nominal.u_bar[0], 0.5);
  ASSERT_TRUE(f.box.tau[1].has_value());
  EXPECT_DOUBLE_EQ(f.box.tau[1]->lo, 0.6);
  const Node& da = f.spec.equations[0].root();
  EXPECT_EQ(da.lhs->slot, 2);
  EXPECT_EQ(da.rhs->slot, 1);
  const Node& db = f.spec.equations[1].root();
  EXPECT_EQ(db.lhs->kind, NodeKind::Input);
  EXPECT_EQ(db.lhs->slot, 1);
}

TEST(ParseModel, DelayUsedOnBothKindsIsAnError) {
  ParseResult r = parse(R"(
[states]
a
[inputs]
u
[delays]
d = 0.5
[equations]
da = delay(a, d) + delay(u, d)
)");
  EXPECT_FALSE(r.ok());
}

TEST(ParseModel, ExplicitDelayPrefixIsChecked) {
  ParseResult r = parse(R"(
[states]
a
[inputs]
u
[delays]
input d = 0.5
[equations]
da = delay(a, d)
)");
  EXPECT_FALSE(r.ok());
}

TEST(ParseModel, ParametersWithBoxes) {
  ModelFile f = model_from(R"(
[states]
x
[params]
k = 1.5 in [1, 2]
c = -0.25
[equations]
dx = -k*x + c
)");
  ASSERT_EQ(f.spec.p(), 2);
  EXPECT_DOUBLE_EQ(f.nominal.p_s[0], 1.5);
  EXPECT_DOUBLE_EQ(f.nominal.p_s[1], -0.25);
  EXPECT_TRUE(f.box.p_s[0].has_value());
  EXPECT_FALSE(f.box.p_s[1].has_value());
}

TEST(ParseModel, MissingAndDuplicateEquations) {
  EXPECT_FALSE(parse("[states]\na b\n[equations]\nda = a\n").ok());
  EXPECT_FALSE(parse("[states]\na\n[equations]\nda = a\nda = -a\n").ok());
  EXPECT_FALSE(parse("[states]\na a\n[equations]\nda = a\n").ok());
}

TEST(ParseModel, UnknownSectionAndStrayContent) {
  EXPECT_FALSE(parse("[states]\na\n[extra]\nq\n[equations]\nda = a\n").ok());
  EXPECT_FALSE(parse("a\n[states]\na\n[equations]\nda = a\n").ok());
}

TEST(ParseModel, OutputRows) {
  ModelFile f = model_from(R"(
[states]
a b
[equations]
da = b
db = -a
[output]
1 0
0 1
)");
  EXPECT_TRUE(f.spec.output_map.isIdentity());
  ParseResult r = parse("[states]\na b\n[equations]\nda = b\ndb = -a\n[output]\n1 1\n");
  ASSERT_TRUE(r.ok());
  EXPECT_FALSE(validate(r.model->spec, r.model->nominal).empty());
}

TEST(ParseModel, CommentsAreIgnored) {
  ModelFile f = model_from("# header\n[states]\nx  # the state\n[equations]\ndx = -x # decay\n");
  EXPECT_EQ(f.spec.n(), 1);
}

TEST(ParseModel, ReservedWordsCannotBeNames) {
  EXPECT_FALSE(parse("[states]\nsin\n[equations]\ndsin = 1\n").ok());
}

TEST(ParseModel, Deterministic) {
  std::string src = ddeid::testing::read_text(std::string(DDEID_MODELS_DIR) + "/eq17.model");
  ParseResult a = parse(src), b = parse(src);
  ASSERT_TRUE(a.ok() && b.ok());
  for (int i = 0; i < a.model->spec.n(); ++i)
    EXPECT_TRUE(same_structure(a.model->spec.equations[i], b.model->spec.equations[i]));
}

TEST(Validate, DelayOrdering) {
  ModelFile f = model_from(R"(
[states]
x
[delays]
a = 1.0
b = 0.5
[equations]
dx = delay(x, a) - delay(x, b)
)");
  auto v = validate(f.spec, f.nominal);
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v.front().code, "delay-order");
}
