#include "doctest.h"
#include "minimax/oracle.hpp"
#include "minimax/value_function.hpp"
#include "support.hpp"

using namespace mmx;
using testing::vec;

TEST_CASE("finite differences of simple fields") {
  const auto p1 = [](const Vector& x) { return 0.5 * x(0) * x(0); };
  FdResult r = fd_derivatives(p1, vec({0.3}), 1e-5, 1e-4);
  CHECK(r.gradient(0) == doctest::Approx(0.3).epsilon(1e-8));
  CHECK(r.hessian(0, 0) == doctest::Approx(1.0).epsilon(1e-6));

  r = fd_derivatives([](const Vector&) { return 4.0; }, vec({1, -2}), 1e-4);
  CHECK(r.gradient.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.hessian.cwiseAbs().maxCoeff() == 0.0);

  const auto mixed = [](const Vector& x) { return x(0) * x(1) + x(1) * x(1) * x(1); };
  r = fd_derivatives(mixed, vec({0.5, 2}), 1e-4);
  CHECK(r.hessian(0, 1) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.hessian(1, 0) == r.hessian(0, 1));
  CHECK(r.hessian(1, 1) == doctest::Approx(12.0).epsilon(1e-6));
}

TEST_CASE("finite differences of the P2 value function at the kink") {
  const KktSolution base = solve_lower(fixtures::p2(), vec({0}), KktSeed{vec({0}), Vector(), Vector()}, CheckConfig{});
  const TrackedValueFunction phi(fixtures::p2(), base, CheckConfig{});
  CHECK(std::fabs(fd_derivatives(phi, vec({0}), 1e-5).gradient(0)) <= 1e-5);
}

TEST_CASE("grid maximization of the lower level") {
  GridMax g = grid_local_maximize_points(fixtures::p1(), vec({0.3}), vec({0}), 1.0, 1001);
  CHECK(g.y(0) == doctest::Approx(0.3).epsilon(1e-3));
  CHECK(g.feasible == 1001);
  g = grid_local_maximize(fixtures::p2(), vec({0.5}), vec({0}), 1.0, 1e-3);
  CHECK(g.y(0) == doctest::Approx(0.0));
  CHECK(g.feasible < g.evaluated);
  g = grid_local_maximize(fixtures::p2(), vec({-0.5}), vec({0}), 1.0, 1e-3);
  CHECK(g.y(0) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(grid_local_maximize(fixtures::p2(), vec({0}), vec({5}), 0.5, 1e-2), EmptyGridError);
}

TEST_CASE("property: grid maximum is within step of the analytic maximizer") {
  // f = -(y - a x)^2 has maximizer y = a x.
  const ProblemSpec spec = parse_problem("dims 1 1 0 0 0 0\nf = -(y1 - 0.7*x1)^2\n");
  for (double x : {-0.9, -0.2, 0.0, 0.35, 0.8}) {
    for (double step : {1e-2, 1e-3}) {
      const GridMax g = grid_local_maximize(spec, vec({x}), vec({0}), 1.0, step);
      CHECK(std::fabs(g.y(0) - 0.7 * x) <= step / 2 + 1e-12);
    }
  }
}

TEST_CASE("definition oracle on the fixtures") {
  const GridSpec grid;
  DefinitionCheck c = verify_minimax_definition(fixtures::p1(), vec({0}), vec({0}), grid);
  CHECK(c.pass);
  CHECK(c.worst_violation <= grid.tol);

  // phi(x) = -(x_+)^2 near 0 for P2: the outer inequality fails to the right.
  c = verify_minimax_definition(fixtures::p2(), vec({0}), vec({0}), grid);
  CHECK_FALSE(c.pass);
  CHECK(c.side == "right");
  REQUIRE(c.witness_x);
  CHECK((*c.witness_x)(0) > 0);

  c = verify_minimax_definition(fixtures::p1(), vec({0.5}), vec({0.5}), grid);
  CHECK_FALSE(c.pass);
  REQUIRE(c.witness_x);
  CHECK((*c.witness_x)(0) < 0.5);
}

TEST_CASE("property: a larger tolerance never turns a pass into a failure") {
  struct Case {
    ProblemSpec spec;
    Vector x, y;
  };
  const std::vector<Case> cases = {{fixtures::p1(), vec({0}), vec({0})},
                                   {fixtures::p2(), vec({0}), vec({0})},
                                   {fixtures::p1(), vec({0.5}), vec({0.5})},
                                   {fixtures::p4(), vec({1}), vec({1})}};
  for (const auto& c : cases) {
    bool passed = false;
    for (double tol : {1e-12, 1e-9, 1e-4, 1e-2, 1.0}) {
      GridSpec grid;
      grid.step = 1e-2;
      grid.tol = tol;
      const bool now = verify_minimax_definition(c.spec, c.x, c.y, grid).pass;
      CHECK((!passed || now));
      passed = passed || now;
    }
    CHECK(passed);
  }
}
