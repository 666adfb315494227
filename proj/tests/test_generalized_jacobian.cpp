#include <random>

#include "doctest.h"
#include "minimax/generalized_jacobian.hpp"
#include "minimax/value_function.hpp"
#include "support.hpp"

using namespace mmx;
using testing::vec;

namespace {

KktSolution at(const ProblemSpec& spec, const Vector& x, const Vector& y0) {
  return solve_lower(spec, x, KktSeed{y0, Vector(), Vector()}, CheckConfig{});
}

WSelector selector(std::initializer_list<double> d) {
  WSelector w;
  w.diag = vec(d);
  w.source.assign(d.size(), SelectorSource::Free);
  return w;
}

// Two coupled constraints both weakly active at x = 0 (beta = {1, 2}).
const char* kTwoBeta =
    "dims 2 2 0 2 0 0\n"
    "f = -(y1 - x1)^2 - (y2 - x2)^2 - 0.2*y1*y2 + 0.1*x1*y2\n"
    "g1 = y1\n"
    "g2 = y2 + 0.5*y1\n";

}  // namespace

TEST_CASE("projection onto the nonpositive orthant") {
  CHECK(project_nonpositive(vec({-3})) == vec({-3}));
  CHECK(project_nonpositive(vec({2})) == vec({0}));
  CHECK(project_nonpositive(vec({0.5, -0.5, 0})) == vec({0, -0.5, 0}));
}

TEST_CASE("B-selector enumeration") {
  ActivePartition p = classify_partition(vec({0, -1}), vec({1, 0}), 1e-8);
  auto s = enumerate_b_selectors(p);
  REQUIRE(s.size() == 1);
  CHECK(s[0].diag == vec({0, 1}));
  CHECK(s[0].source[0] == SelectorSource::ForcedZero);
  CHECK(s[0].source[1] == SelectorSource::ForcedOne);

  p = classify_partition(vec({0}), vec({0}), 1e-8);
  s = enumerate_b_selectors(p);
  REQUIRE(s.size() == 2);
  CHECK(s[0].diag == vec({0}));
  CHECK(s[1].diag == vec({1}));

  p = classify_partition(vec({0, 0}), vec({0, 0}), 1e-8);
  s = enumerate_b_selectors(p);
  REQUIRE(s.size() == 4);
  CHECK(s[1].diag == vec({1, 0}));
  CHECK(s[2].diag == vec({0, 1}));
  CHECK(s[3].diag == vec({1, 1}));

  p = classify_partition(Vector::Zero(5), Vector::Zero(5), 1e-8);
  CHECK(enumerate_b_selectors(p, 32).size() == 32);
  CHECK_THROWS_AS(enumerate_b_selectors(p, 4), SelectorCapExceeded);

  p = classify_partition(vec({0}), vec({0}), 1e-8);
  const auto c = clarke_selectors(p, 5);
  REQUIRE(c.size() == 5);
  CHECK(c[2].diag(0) == doctest::Approx(0.5));
}

TEST_CASE("A(x, W) on the fixtures") {
  const KktSolution s2 = at(fixtures::p2(), vec({0}), vec({0}));
  Matrix a = assemble_A(fixtures::p2(), s2, selector({0}));
  CHECK(a(0, 0) == doctest::Approx(-2.0));
  CHECK(std::fabs(a(0, 1)) == doctest::Approx(1.0));
  CHECK(a(1, 0) == doctest::Approx(1.0));
  CHECK(a(1, 1) == doctest::Approx(0.0));
  CHECK(std::fabs(a.determinant()) == doctest::Approx(1.0));
  a = assemble_A(fixtures::p2(), s2, selector({1}));
  CHECK(a(1, 0) == doctest::Approx(0.0));
  CHECK(std::fabs(a(1, 1)) == doctest::Approx(1.0));
  CHECK(std::fabs(a.determinant()) == doctest::Approx(2.0));

  const KktSolution s1 = at(fixtures::p1(), vec({0}), vec({0}));
  a = assemble_A(fixtures::p1(), s1, selector({1}));
  CHECK(a(0, 0) == doctest::Approx(-1.0));
  CHECK(std::fabs(a.determinant()) == doctest::Approx(1.0));
}

TEST_CASE("H(x, W) examples") {
  const KktSolution s1 = at(fixtures::p1(), vec({0}), vec({0}));
  const Matrix h1 = assemble_H(fixtures::p1(), s1, selector({1}));
  CHECK(h1(0, 0) == doctest::Approx(-1.0));
  CHECK(h1(1, 0) == doctest::Approx(0.0));

  const KktSolution s2 = at(fixtures::p2(), vec({0}), vec({0}));
  CHECK(assemble_H(fixtures::p2(), s2, selector({0}))(0, 0) == doctest::Approx(0.0));

  const ProblemSpec separable = parse_problem("dims 1 1 0 1 0 0\nf = -y1^2 + x1^2\ng1 = y1 - 1\n");
  const KktSolution ss = at(separable, vec({0.3}), vec({0}));
  CHECK(assemble_H(separable, ss, selector({1})).cwiseAbs().maxCoeff() == 0.0);
  const auto grads = phi_generalized_gradients(separable, ss, CheckConfig{});
  REQUIRE(grads.members.size() == 1);
  CHECK(grads.members[0].value(0, 0) == doctest::Approx(0.6));
}

TEST_CASE("directional derivatives of the KKT map at P2's kink") {
  const CheckConfig cfg;
  const KktSolution s = at(fixtures::p2(), vec({0}), vec({0}));
  auto has_y = [](const GeneralizedDerivativeSet& set, double y) {
    for (const auto& m : set.members)
      if (!m.singular && std::fabs(m.value(0, 0) - y) <= 1e-9) return true;
    return false;
  };
  const auto plus = kkt_map_directional(fixtures::p2(), s, vec({1}), cfg);
  CHECK(plus.members.size() == 2);
  CHECK(has_y(plus, 0.0));
  CHECK(plus.members[0].value(0, 0) == doctest::Approx(0.0));  // W = 0
  const auto minus = kkt_map_directional(fixtures::p2(), s, vec({-1}), cfg);
  CHECK(has_y(minus, -1.0));

  const KktSolution s1 = at(fixtures::p1(), vec({0}), vec({0}));
  for (double d : {-2.0, 0.5, 1.0}) {
    const auto set = kkt_map_directional(fixtures::p1(), s1, vec({d}), cfg);
    REQUIRE(set.members.size() == 1);
    CHECK(set.members[0].value(0, 0) == doctest::Approx(d));
  }
}

TEST_CASE("property: one-sided FD derivatives lie in the candidate set (20 directions)") {
  const ProblemSpec spec = parse_problem(kTwoBeta);
  const CheckConfig cfg;
  const KktSolution base = at(spec, vec({0, 0}), vec({0, 0}));
  REQUIRE(solution_partition(spec, base, cfg.tol_act).beta.size() == 2);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss;
  for (int k = 0; k < 20; ++k) {
    Vector d = vec({gauss(rng), gauss(rng)});
    d.normalize();
    const auto set = kkt_map_directional(spec, base, d, cfg);
    REQUIRE(set.members.size() == 4);
    for (double t : {1e-4, 1e-5}) {
      const KktSolution moved = solve_lower(spec, t * d, KktSeed{base.y, base.mu, base.lambda}, cfg);
      Vector fd(4);
      fd << (moved.y - base.y) / t, (moved.lambda - base.lambda) / t;
      double best = kInf;
      for (const auto& m : set.members) {
        if (!m.singular) best = std::min(best, inf_norm(Vector(m.value.col(0)) - fd));
      }
      CHECK(best <= 1e-3);
    }
  }
}

TEST_CASE("phi candidate gradients") {
  const CheckConfig cfg;
  const auto p1 = phi_generalized_gradients(fixtures::p1(), at(fixtures::p1(), vec({0}), vec({0})), cfg);
  REQUIRE(p1.members.size() == 1);
  CHECK(p1.members[0].value(0, 0) == doctest::Approx(0.0));
  const auto p2 = phi_generalized_gradients(fixtures::p2(), at(fixtures::p2(), vec({0}), vec({0})), cfg);
  REQUIRE(p2.members.size() == 2);
  for (const auto& m : p2.members) CHECK(m.value(0, 0) == doctest::Approx(0.0));
  const auto outer = phi_generalized_gradients(fixtures::p2(), at(fixtures::p2(), vec({0}), vec({0})), cfg,
                                               DerivativeKind::OuterApprox);
  CHECK(outer.members.size() == 2 + 3);
  CHECK(outer.kind == DerivativeKind::OuterApprox);
}

TEST_CASE("property: on smooth points the single candidate equals grad phi") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto inst = testing::random_instance(seed, 3, 2, 2);
    const ProblemSpec spec = parse_problem(inst.text);
    const KktSolution s = solve_lower(spec, inst.x, KktSeed{inst.y, Vector(), inst.lambda}, CheckConfig{});
    const auto set = phi_generalized_gradients(spec, s, CheckConfig{});
    REQUIRE(set.members.size() == 1);
    CHECK(inf_norm(Vector(set.members[0].value.col(0)) - phi_gradient(spec, s)) <= 1e-10);
  }
}

TEST_CASE("selector families are nonsingular under Assumption A, also nearby") {
  const CheckConfig cfg;
  const ProblemSpec two = parse_problem(kTwoBeta);
  struct Case {
    ProblemSpec spec;
    Vector x;
  };
  const std::vector<Case> cases = {{fixtures::p2(), vec({0})}, {two, vec({0, 0})}};
  for (const auto& c : cases) {
    const KktSolution s = at(c.spec, c.x, Vector::Zero(c.spec.dims().m));
    REQUIRE(check_assumption_a(c.spec, c.x, s.y, cfg).assumption_a.satisfied());
    const ActivePartition p = solution_partition(c.spec, s, cfg.tol_act);
    std::vector<WSelector> family = enumerate_b_selectors(p);
    CHECK(family.size() == (1u << p.beta.size()));
    for (auto& w : clarke_selectors(p, 5)) family.push_back(w);
    const NonsingularitySummary sum = check_selector_family(c.spec, s, family);
    CHECK(sum.singular == 0);
    CHECK(sum.min_pivot >= 1e-8);
    for (int i = 0; i < c.x.size(); ++i) {
      for (double delta : {-1e-3, 1e-3}) {
        Vector xp = c.x;
        xp(i) += delta;
        const KktSolution sp = solve_lower(c.spec, xp, KktSeed{s.y, s.mu, s.lambda}, cfg);
        // Same selector family (the one of x*) applied to the moved point.
        CHECK(check_selector_family(c.spec, sp, family).singular == 0);
      }
    }
  }
}
