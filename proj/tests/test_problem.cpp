#include <random>

#include "doctest.h"
#include "minimax/problem.hpp"
#include "support.hpp"

using namespace mmx;
using testing::vec;

namespace {

double eval(const Expr& e, const Vector& x, const Vector& y) {
  return e.evaluate({x.data(), static_cast<std::size_t>(x.size())}, {y.data(), static_cast<std::size_t>(y.size())});
}

}  // namespace

TEST_CASE("fixture P1 parses and evaluates") {
  const ProblemSpec p1 = fixtures::p1();
  CHECK(p1.dims() == Dimensions{1, 1, 0, 1, 0, 1});
  CHECK(eval(p1.f(), vec({1}), vec({1})) == doctest::Approx(0.5));
  CHECK(eval(p1.g()[0], vec({0}), vec({0})) == -1.0);
  CHECK(eval(p1.G()[0], vec({0}), vec({})) == -2.0);
}

TEST_CASE("fixture P2 parses and evaluates") {
  const ProblemSpec p2 = parse_problem("dims 1 1 0 1 0 0\nf = -(y1-x1)^2\ng1 = y1\n");
  CHECK(p2 == fixtures::p2());
  CHECK(eval(p2.f(), vec({0}), vec({0})) == 0.0);
  CHECK(eval(p2.f(), vec({1}), vec({3})) == -4.0);
}

TEST_CASE("y-variable in an upper constraint is rejected with its position") {
  try {
    parse_problem("dims 1 1 0 0 0 1\nf = x1*y1\nG1 = y1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("y-variable") != std::string::npos);
  }
}

TEST_CASE("parse errors carry line and column") {
  CHECK_THROWS_AS(parse_problem("dims 1 1 0 0 0\nf = x1\n"), ParseError);
  CHECK_THROWS_AS(parse_problem("dims 1 1 0 0 0 0\nf = x1 +\n"), ParseError);
  CHECK_THROWS_AS(parse_problem("dims 1 1 0 0 0 0\nf = x2\n"), ParseError);
  CHECK_THROWS_AS(parse_problem("dims 1 1 0 1 0 0\nf = x1\n"), ParseError);  // g1 missing
  CHECK_THROWS_AS(parse_problem("dims 1 1 0 0 0 0\nf = x1\ng1 = y1\n"), ParseError);
  try {
    parse_problem("dims 1 1 0 0 0 0\nf = x1 * * y1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 10);
  }
}

TEST_CASE("comments and blank lines are ignored") {
  const ProblemSpec p = parse_problem("# header\n\ndims 1 1 0 1 0 1\nf = x1*y1 - 0.5*y1^2 # inline\ng1 = y1 - 1\nG1 = x1 - 2\n");
  CHECK(p == fixtures::p1());
}

TEST_CASE("serialize then parse is idempotent") {
  for (const ProblemSpec& p : {fixtures::p1(), fixtures::p2(), fixtures::p3(), fixtures::p4(), fixtures::p1_flipped()}) {
    const std::string once = serialize_problem(p);
    const ProblemSpec again = parse_problem(once);
    CHECK(again == p);
    CHECK(serialize_problem(again) == once);
    CHECK(problem_digest(again) == problem_digest(p));
  }
  const auto inst = testing::random_instance(7, 3, 3, 2);
  const ProblemSpec r = parse_problem(inst.text);
  CHECK(parse_problem(serialize_problem(r)) == r);
}

TEST_CASE("digest distinguishes problems") {
  CHECK(problem_digest(fixtures::p1()) != problem_digest(fixtures::p4()));
  CHECK(problem_digest(fixtures::p1()).size() == 16);
}

TEST_CASE("symbolic derivatives: textbook cases") {
  const Expr f = parse_expression("x1*y1 - 0.5*y1^2", 1, 1);
  const Expr df = f.derivative({VarKind::Y, 0});
  for (double x : {-1.0, 0.0, 2.5}) {
    for (double y : {-0.5, 0.0, 1.0}) CHECK(eval(df, vec({x}), vec({y})) == doctest::Approx(x - y));
  }
  CHECK(Expr::constant(3.0).derivative({VarKind::X, 0}).is_constant(0.0));
  // d/dx1 exp(x1*y1) at (1,2) against a central difference with step 1e-6.
  const Expr e = parse_expression("exp(x1*y1)", 1, 1);
  const double sym = eval(e.derivative({VarKind::X, 0}), vec({1}), vec({2}));
  const double h = 1e-6;
  const double fd = (eval(e, vec({1 + h}), vec({2})) - eval(e, vec({1 - h}), vec({2}))) / (2 * h);
  CHECK(sym == doctest::Approx(2 * std::exp(2.0)).epsilon(1e-14));
  CHECK(std::fabs(sym - fd) / sym <= 1e-6);
}

TEST_CASE("symbolic derivatives of the elementary functions match finite differences") {
  const char* texts[] = {"sin(x1*y1) + cos(x2)", "log(1 + x1^2) * sqrt(2 + y1)", "x1 / (1 + y1^2)", "(x1 + 2)^y1",
                         "exp(-x2) * sin(y1)^3"};
  const Vector x = vec({0.3, -0.7});
  const Vector y = vec({0.4});
  for (const char* t : texts) {
    const Expr e = parse_expression(t, 2, 1);
    for (int v = 0; v < 3; ++v) {
      const VarId id = v < 2 ? VarId{VarKind::X, v} : VarId{VarKind::Y, 0};
      const double h = 1e-6;
      Vector xp = x, xm = x, yp = y, ym = y;
      if (v < 2) {
        xp(v) += h;
        xm(v) -= h;
      } else {
        yp(0) += h;
        ym(0) -= h;
      }
      const double fd = (eval(e, xp, yp) - eval(e, xm, ym)) / (2 * h);
      CHECK(eval(e.derivative(id), x, y) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("property: 200 random polynomials, symbolic gradient vs central differences") {
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> coord(-1.5, 1.5);
  int failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Expr p = testing::random_polynomial(rng);
    const Vector x = vec({coord(rng), coord(rng)});
    const Vector y = vec({coord(rng)});
    for (int v = 0; v < 3; ++v) {
      const VarId id = v < 2 ? VarId{VarKind::X, v} : VarId{VarKind::Y, 0};
      const double h = 1e-6;
      Vector xp = x, xm = x, yp = y, ym = y;
      if (v < 2) {
        xp(v) += h;
        xm(v) -= h;
      } else {
        yp(0) += h;
        ym(0) -= h;
      }
      const double fd = (eval(p, xp, yp) - eval(p, xm, ym)) / (2 * h);
      const double sym = eval(p.derivative(id), x, y);
      if (std::fabs(sym - fd) > 1e-6 * std::max(1.0, std::fabs(sym))) ++failures;
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("domain errors name the subexpression") {
  const Expr e = parse_expression("log(x1) + 1/y1", 1, 1);
  CHECK_THROWS_AS(eval(e, vec({-1}), vec({1})), DomainError);
  try {
    eval(e, vec({1}), vec({0}));
    FAIL("expected a domain error");
  } catch (const DomainError& err) {
    CHECK(err.expression().find("y1") != std::string::npos);
  }
}

TEST_CASE("eval_bundle on the fixtures") {
  const DerivativeBundle b1 = eval_bundle(fixtures::p1(), vec({0}), vec({0}));
  CHECK(b1.f.dy(0) == 0.0);
  CHECK(b1.f.dyy(0, 0) == -1.0);
  CHECK(b1.g_jac_y()(0, 0) == 1.0);
  CHECK(b1.g_values()(0) == -1.0);
  CHECK(b1.G_jac()(0, 0) == 1.0);

  const DerivativeBundle b2 = eval_bundle(fixtures::p2(), vec({0}), vec({0}));
  CHECK(b2.f.dyy(0, 0) == -2.0);
  CHECK(b2.f.dxy(0, 0) == 2.0);
}

TEST_CASE("eval_bundle blocks are symmetric and agree with differences") {
  const auto inst = testing::random_instance(11, 3, 2, 2);
  const ProblemSpec spec = parse_problem(inst.text);
  const DerivativeBundle b = eval_bundle(spec, inst.x, inst.y);
  CHECK((b.f.dxx - b.f.dxx.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((b.f.dyy - b.f.dyy.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  for (const auto& g : b.g) CHECK((g.dyy - g.dyy.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  // Cross block against differences of the y-gradient.
  const double h = 1e-6;
  for (int j = 0; j < 3; ++j) {
    Vector xp = inst.x, xm = inst.x;
    xp(j) += h;
    xm(j) -= h;
    const Vector col = (eval_bundle(spec, xp, inst.y).f.dy - eval_bundle(spec, xm, inst.y).f.dy) / (2 * h);
    for (int i = 0; i < 2; ++i) CHECK(b.f.dxy(j, i) == doctest::Approx(col(i)).epsilon(1e-6));
  }
}

TEST_CASE("candidate validation") {
  const ProblemSpec p1 = fixtures::p1();
  CandidatePoint c = testing::point({0}, {0});
  CHECK_NOTHROW(validate_candidate(p1, c));
  c.lambda = vec({1, 2});
  CHECK_THROWS_AS(validate_candidate(p1, c), SpecError);
  c.lambda = vec({std::nan("")});
  CHECK_THROWS_AS(validate_candidate(p1, c), SpecError);
  CHECK_THROWS_AS(validate_candidate(p1, testing::point({0, 1}, {0})), SpecError);
}

TEST_CASE("abs is parsed but refused by smooth entry points") {
  const ProblemSpec p = parse_problem("dims 1 1 0 0 0 0\nf = -abs(y1) + x1\n");
  CHECK(p.contains_abs());
  CHECK_THROWS_AS(require_smooth(p), SpecError);
}
