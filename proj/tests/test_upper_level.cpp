#include "doctest.h"
#include "minimax/upper_level.hpp"
#include "minimax/value_function.hpp"
#include "support.hpp"

using namespace mmx;
using testing::vec;

namespace {

struct SmoothState {
  KktSolution sol;
  Vector grad;
  Matrix hess;
  LambdaPolytope poly;
  UpperConeRep cone;
};

SmoothState smooth_state(const ProblemSpec& spec, const Vector& x, const Vector& y0, const CheckConfig& cfg = {}) {
  SmoothState s;
  s.sol = solve_lower(spec, x, KktSeed{y0, Vector(), Vector()}, cfg);
  s.grad = phi_gradient(spec, s.sol);
  s.hess = phi_hessian(spec, s.sol);
  s.poly = upper_kkt_and_polytope(spec, x, s.grad, cfg);
  s.cone = critical_cone_upper(spec, x, s.grad, s.poly, cfg);
  return s;
}

}  // namespace

TEST_CASE("MFCQ examples") {
  const CheckConfig cfg;
  MfcqResult r = check_mfcq(fixtures::p3(), vec({0}), cfg);
  CHECK(r.result.violated());
  CHECK(r.t_star == doctest::Approx(0.0));
  CHECK(r.active.active.size() == 2);

  r = check_mfcq(fixtures::p1(), vec({0}), cfg);
  CHECK(r.result.satisfied());
  CHECK(r.active.active.empty());

  r = check_mfcq(fixtures::p4(), vec({1}), cfg);
  CHECK(r.result.satisfied());
  CHECK(r.t_star == doctest::Approx(1.0));
  CHECK(r.witness(0) == doctest::Approx(1.0));

  CHECK_THROWS_AS(check_mfcq(fixtures::p4(), vec({0}), cfg), InfeasiblePointError);
}

TEST_CASE("MFCQ equality rank condition") {
  const CheckConfig cfg;
  const ProblemSpec dependent = parse_problem("dims 2 1 0 0 2 0\nf = -y1^2\nH1 = x1 + x2\nH2 = 2*x1 + 2*x2\n");
  CHECK(check_mfcq(dependent, vec({0, 0}), cfg).result.violated());
  const ProblemSpec independent = parse_problem("dims 2 1 0 0 1 1\nf = -y1^2\nH1 = x1 + x2\nG1 = x1\n");
  CHECK(check_mfcq(independent, vec({0, 0}), cfg).result.satisfied());
}

TEST_CASE("property: MFCQ verdict is invariant under positive row scaling") {
  const CheckConfig cfg;
  const char* shapes[] = {"G1 = {a}*x1\nG2 = {b}*(-x1)\n", "G1 = {a}*(x1 + x2)\nG2 = {b}*(x1 - x2)\n",
                          "G1 = {a}*(x1^2 - x2)\nG2 = {b}*(x2 - 2*x1^2)\n"};
  const double scales[][2] = {{1, 1}, {1e-3, 1}, {7, 0.01}, {250, 3}};
  for (const char* shape : shapes) {
    std::optional<Verdict> reference;
    for (const auto& sc : scales) {
      std::string g = shape;
      g.replace(g.find("{a}"), 3, format_number(sc[0]));
      g.replace(g.find("{b}"), 3, format_number(sc[1]));
      const ProblemSpec spec = parse_problem("dims 2 1 0 0 0 2\nf = -y1^2\n" + g);
      const Verdict v = check_mfcq(spec, vec({0, 0}), cfg).result.status;
      if (!reference) reference = v;
      CHECK(v == *reference);
    }
  }
}

TEST_CASE("multiplier polytope") {
  const CheckConfig cfg;
  LambdaPolytope p = upper_kkt_and_polytope(fixtures::p4(), vec({1}), vec({1}), cfg);
  CHECK(p.nonempty);
  REQUIRE(p.singleton());
  CHECK(p.vertices[0](0) == doctest::Approx(1.0));

  p = upper_kkt_and_polytope(fixtures::p1(), vec({0}), vec({0}), cfg);
  REQUIRE(p.singleton());
  CHECK(p.vertices[0](0) == 0.0);

  p = upper_kkt_and_polytope(fixtures::p2(), vec({0}), vec({1}), cfg);
  CHECK_FALSE(p.nonempty);
  CHECK(p.descent_direction.size() == 1);
  CHECK(p.descent_direction(0) < 0);

  // P3 at 0: v1 - v2 = -r0 has an unbounded solution ray.
  p = upper_kkt_and_polytope(fixtures::p3(), vec({0}), vec({0.5}), cfg);
  CHECK(p.nonempty);
  CHECK_FALSE(p.bounded);
}

TEST_CASE("property: polytope nonemptiness by LP agrees with vertex enumeration") {
  const CheckConfig cfg;
  const ProblemSpec spec = parse_problem("dims 2 1 0 0 0 3\nf = -y1^2\nG1 = x1\nG2 = x2\nG3 = x1 + x2\n");
  const double grads[][2] = {{1, 1}, {-1, 1}, {-1, -1}, {0, 2}, {2, -0.5}, {0, 0}};
  for (const auto& g : grads) {
    const LambdaPolytope p = upper_kkt_and_polytope(spec, vec({0, 0}), vec({g[0], g[1]}), cfg);
    if (p.nonempty) {
      REQUIRE(p.enumerated);
      CHECK_FALSE(p.vertices.empty());
    }
    for (const Vector& v : p.vertices) {
      const Vector r = p.r0 + p.JG.transpose() * v.tail(3);
      CHECK(inf_norm(r) <= 1e-9);
      CHECK(v.minCoeff() >= -1e-9);
    }
    // Independent oracle: -grad must lie in the cone spanned by (1,0), (0,1), (1,1).
    const bool expected = g[0] <= 0 && g[1] <= 0;
    CHECK(p.nonempty == expected);
  }
}

TEST_CASE("upper critical cones") {
  const CheckConfig cfg;
  SmoothState s = smooth_state(fixtures::p4(), vec({1}), vec({1}));
  CHECK(analyze_cone(s.cone.literal, 1e-9).trivial());
  s = smooth_state(fixtures::p1(), vec({0}), vec({0}));
  const ConeStructure c = analyze_cone(s.cone.reduced, 1e-9);
  CHECK(c.subspace());
  CHECK(c.lineality.cols() == 1);
  const ProblemSpec pinned = parse_problem("dims 2 1 0 0 2 0\nf = -y1^2 + x1*y1\nH1 = x1\nH2 = x2\n");
  s = smooth_state(pinned, vec({0, 0}), vec({0}));
  CHECK(analyze_cone(s.cone.reduced, 1e-9).trivial());
}

TEST_CASE("second-order tests on the fixtures") {
  const CheckConfig cfg;
  SmoothState s = smooth_state(fixtures::p1(), vec({0}), vec({0}));
  SecondOrderResult nec = second_order_necessary(fixtures::p1(), vec({0}), s.hess, s.poly, s.cone, cfg);
  SecondOrderResult suf = second_order_sufficient(fixtures::p1(), vec({0}), s.hess, s.poly, s.cone, cfg);
  CHECK(nec.result.satisfied());
  CHECK(suf.result.satisfied());
  CHECK(suf.exact);
  CHECK(suf.result.margin == doctest::Approx(1.0));
  CHECK(suf.gamma2 == doctest::Approx(1.0));

  s = smooth_state(fixtures::p4(), vec({1}), vec({1}));
  suf = second_order_sufficient(fixtures::p4(), vec({1}), s.hess, s.poly, s.cone, cfg);
  CHECK(suf.vacuous);
  CHECK(suf.result.satisfied());

  s = smooth_state(fixtures::p1_flipped(), vec({0}), vec({0}));
  nec = second_order_necessary(fixtures::p1_flipped(), vec({0}), s.hess, s.poly, s.cone, cfg);
  suf = second_order_sufficient(fixtures::p1_flipped(), vec({0}), s.hess, s.poly, s.cone, cfg);
  CHECK(nec.result.violated());
  REQUIRE(nec.result.witness);
  CHECK(std::fabs((*nec.result.witness)(0)) == doctest::Approx(1.0));
  CHECK(suf.result.violated());
}

TEST_CASE("property: without upper constraints SONC is the smallest eigenvalue of hess phi") {
  const CheckConfig cfg;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto inst = testing::random_instance(seed, 2, 2, 1);
    const ProblemSpec spec = parse_problem(inst.text);
    const KktSolution sol = solve_lower(spec, inst.x, KktSeed{inst.y, Vector(), inst.lambda}, cfg);
    const Vector grad = phi_gradient(spec, sol);
    const Matrix hess = phi_hessian(spec, sol);
    // Shift the objective by -grad.x so that x is stationary: the Hessian is unchanged.
    std::string text = inst.text;
    const auto f_end = text.find('\n', text.find("f = "));
    std::string shift;
    for (int j = 0; j < 2; ++j) shift += " + " + testing::num(-grad(j)) + "*x" + std::to_string(j + 1);
    text.insert(f_end, shift);
    const ProblemSpec shifted = parse_problem(text);
    const KktSolution s2 = solve_lower(shifted, inst.x, KktSeed{inst.y, Vector(), inst.lambda}, cfg);
    const Vector g2 = phi_gradient(shifted, s2);
    CHECK(inf_norm(g2) <= 1e-12);
    const LambdaPolytope poly = upper_kkt_and_polytope(shifted, inst.x, g2, cfg);
    const UpperConeRep cone = critical_cone_upper(shifted, inst.x, g2, poly, cfg);
    const SecondOrderResult nec = second_order_necessary(shifted, inst.x, phi_hessian(shifted, s2), poly, cone, cfg);
    const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(hess).eigenvalues().minCoeff();
    CHECK(nec.result.margin == doctest::Approx(lmin).epsilon(1e-9));
    CHECK(nec.result.satisfied() == (lmin >= -cfg.tol_pd));
  }
}

TEST_CASE("sampled and exact sufficiency margins agree on a half-space cone") {
  // min over the half-plane {d1 <= 0} of a quadratic with singleton Lambda.
  const ProblemSpec spec = parse_problem("dims 2 1 0 0 0 1\nf = x1^2 + 0.5*x2^2 + 0.5*x1*x2 - y1^2\nG1 = x1\n");
  const CheckConfig cfg;
  SmoothState s = smooth_state(spec, vec({0, 0}), vec({0}));
  REQUIRE(s.poly.singleton());
  const SecondOrderResult suf = second_order_sufficient(spec, vec({0, 0}), s.hess, s.poly, s.cone, cfg);
  CHECK_FALSE(suf.exact);
  CHECK(suf.result.satisfied());
  // Oracle: the minimum of d'Md on the unit half-circle, by dense angle scan.
  double best = kInf;
  for (int k = 0; k <= 200000; ++k) {
    const double t = M_PI / 2 + M_PI * k / 200000.0;
    const Vector d = vec({std::cos(t), std::sin(t)});
    best = std::min(best, d.dot(s.hess * d));
  }
  CHECK(suf.result.margin == doctest::Approx(best).epsilon(1e-6));
}

TEST_CASE("nonsmooth first-order test") {
  const CheckConfig cfg;
  KktSolution sol = solve_lower(fixtures::p2(), vec({0}), KktSeed{vec({0}), Vector(), Vector()}, cfg);
  NonsmoothFirstOrder r = first_order_nonsmooth_necessary(fixtures::p2(), vec({0}), sol, cfg);
  CHECK(r.result.satisfied());
  CHECK(r.u.size() == 0);
  CHECK(r.v.size() == 0);

  sol = solve_lower(fixtures::p2(), vec({0.3}), KktSeed{vec({0}), Vector(), Vector()}, cfg);
  r = first_order_nonsmooth_necessary(fixtures::p2(), vec({0.3}), sol, cfg);
  CHECK(r.result.violated());
  CHECK(r.candidate_gradient(0) == doctest::Approx(-0.6));

  sol = solve_lower(fixtures::p4(), vec({1}), KktSeed{vec({1}), Vector(), Vector()}, cfg);
  r = first_order_nonsmooth_necessary(fixtures::p4(), vec({1}), sol, cfg);
  CHECK(r.result.satisfied());
  REQUIRE(r.v.size() == 1);
  CHECK(r.v(0) == doctest::Approx(1.0));
}
