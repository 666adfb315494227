// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "minimax/certifier.hpp"
#include "minimax/generalized_jacobian.hpp"
#include "minimax/oracle.hpp"
#include "minimax/report.hpp"
#include "minimax/value_function.hpp"
#include "support.hpp"

using namespace mmx;
using testing::vec;

namespace {

// Pinned tolerances.
constexpr double kGradTol = 1e-6;
constexpr double kHessTol = 1e-4;
constexpr double kGradStep = 1e-5;
constexpr double kHessStep = 1e-4;
constexpr double kBudgetDerivs = 5.0;    // seconds, criterion 1
constexpr double kExampleTol = 1e-6;
constexpr double kMinPivot = 1e-8;
constexpr double kPerturb = 1e-3;
constexpr int kClarkePoints = 5;
constexpr double kQuadConst = 1e3;
constexpr double kRoundoffFloor = 1e-14;
constexpr double kTerminal = 1e-10;
constexpr int kMaxNewton = 10;
constexpr double kBudgetCertify = 2.0;   // seconds per run, criterion 5
constexpr double kPolyTol = 1e-6;
constexpr int kPolyCount = 200;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

CandidatePoint candidate(std::initializer_list<double> x, std::initializer_list<double> y) {
  return testing::point(x, y);
}

// phi by a fresh Newton solve at every evaluation point.
double phi_at(const ProblemSpec& spec, const KktSolution& base, const Vector& x) {
  return phi_value(spec, solve_lower(spec, x, KktSeed{base.y, base.mu, base.lambda}, CheckConfig{}));
}

std::string fmt(double v) { return format_number(v); }

Outcome value_function_derivatives() {
  Outcome out;
  const auto t0 = Clock::now();
  double worst_g = 0.0, worst_h = 0.0;
  auto check = [&](const ProblemSpec& spec, const Vector& x, const KktSeed& seed, const std::string& label) {
    const KktSolution s = solve_lower(spec, x, seed, CheckConfig{});
    auto phi = [&](const Vector& p) { return phi_at(spec, s, p); };
    const double eg = inf_norm(phi_gradient(spec, s) - testing::central_gradient(phi, x, kGradStep));
    const double eh = (phi_hessian(spec, s) - testing::central_hessian(phi, x, kHessStep)).cwiseAbs().maxCoeff();
    worst_g = std::max(worst_g, eg);
    worst_h = std::max(worst_h, eh);
    out.require(eg <= kGradTol, label + " gradient error " + fmt(eg));
    out.require(eh <= kHessTol, label + " Hessian error " + fmt(eh));
  };
  for (double x : {-0.4, 0.0, 0.3}) check(fixtures::p1(), vec({x}), KktSeed{vec({0}), Vector(), Vector()}, "P1");
  for (double x : {-0.5, 0.5}) check(fixtures::p2(), vec({x}), KktSeed{vec({0}), Vector(), Vector()}, "P2");
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const int n = 1 + static_cast<int>(seed % 3);
    const int m = 1 + static_cast<int>((seed / 3) % 3);
    const int m2 = static_cast<int>(seed % 3 == 0 ? 0 : 1 + seed % 2);
    const auto inst = testing::random_instance(seed, n, m, m2);
    check(parse_problem(inst.text), inst.x, KktSeed{inst.y, Vector(), inst.lambda}, "random seed " + std::to_string(seed));
  }
  const double elapsed = seconds_since(t0);
  out.require(elapsed < kBudgetDerivs, "took " + fmt(elapsed) + " s");
  if (out.pass)
    out.detail = "max gradient error " + fmt(worst_g) + ", max Hessian error " + fmt(worst_h) + ", " + fmt(elapsed) + " s";
  return out;
}

Outcome worked_examples() {
  Outcome out;
  const KktSolution s1 = solve_lower(fixtures::p1(), vec({0}), KktSeed{vec({0}), Vector(), Vector()}, CheckConfig{});
  auto phi1 = [&](const Vector& p) { return phi_at(fixtures::p1(), s1, p); };
  const double g = phi_gradient(fixtures::p1(), s1)(0);
  const double h = phi_hessian(fixtures::p1(), s1)(0, 0);
  const double fd_g = testing::central_gradient(phi1, vec({0}), kGradStep)(0);
  const double fd_h = testing::central_hessian(phi1, vec({0}), kHessStep)(0, 0);
  out.require(std::fabs(g) <= kExampleTol && std::fabs(fd_g) <= kExampleTol, "P1 phi'(0) = " + fmt(g));
  out.require(std::fabs(h - 1) <= kExampleTol && std::fabs(fd_h - 1) <= kHessTol, "P1 phi''(0) = " + fmt(h));

  const KktSolution s2 = solve_lower(fixtures::p2(), vec({0}), KktSeed{vec({0}), Vector(), Vector()}, CheckConfig{});
  for (double d : {-1.0, 1.0}) {
    const double expected = d < 0 ? -1.0 : 0.0;
    const double t = 1e-7;
    const KktSolution moved =
        solve_lower(fixtures::p2(), vec({t * d}), KktSeed{s2.y, s2.mu, s2.lambda}, CheckConfig{});
    const double fd = (moved.y(0) - s2.y(0)) / t;
    out.require(std::fabs(fd - expected) <= kExampleTol, "P2 one-sided y'(0;" + fmt(d) + ") = " + fmt(fd));
    const auto set = kkt_map_directional(fixtures::p2(), s2, vec({d}), CheckConfig{});
    bool member = false;
    for (const auto& m : set.members) member = member || (!m.singular && std::fabs(m.value(0, 0) - expected) <= kExampleTol);
    out.require(member, "P2 y'(0;" + fmt(d) + ") not among the selector derivatives");
  }
  if (out.pass) out.detail = "P1 phi'(0)=" + fmt(g) + " phi''(0)=" + fmt(h) + "; P2 y'(0;-1)=-1, y'(0;1)=0";
  return out;
}

struct FixtureCandidate {
  const char* label;
  ProblemSpec spec;
  CandidatePoint point;
};

std::vector<FixtureCandidate> fixture_candidates() {
  return {{"P1(0,0)", fixtures::p1(), candidate({0}, {0})},
          {"P1(0.5,0.5)", fixtures::p1(), candidate({0.5}, {0.5})},
          {"P2(0,0)", fixtures::p2(), candidate({0}, {0})},
          {"P2(-0.5,-0.5)", fixtures::p2(), candidate({-0.5}, {-0.5})},
          {"P3(0,0)", fixtures::p3(), candidate({0}, {0})},
          {"P4(1,1)", fixtures::p4(), candidate({1}, {1})},
          {"P1_flipped(0,0)", fixtures::p1_flipped(), candidate({0}, {0})}};
}

Outcome selector_nonsingularity() {
  Outcome out;
  const CheckConfig cfg;
  int covered = 0;
  double min_pivot = kInf;
  for (const auto& c : fixture_candidates()) {
    if (!check_assumption_a(c.spec, c.point.x, c.point.y, cfg).assumption_a.satisfied()) continue;
    ++covered;
    const KktSolution s = solve_lower(c.spec, c.point.x, KktSeed{c.point.y, Vector(), Vector()}, cfg);
    const ActivePartition p = solution_partition(c.spec, s, cfg.tol_act);
    std::vector<WSelector> family = enumerate_b_selectors(p);
    for (auto& w : clarke_selectors(p, kClarkePoints)) family.push_back(w);
    const NonsingularitySummary sum = check_selector_family(c.spec, s, family);
    min_pivot = std::min(min_pivot, sum.min_pivot);
    out.require(sum.singular == 0 && sum.min_pivot >= kMinPivot,
                std::string(c.label) + " min pivot " + fmt(sum.min_pivot));
    for (int i = 0; i < c.point.x.size(); ++i) {
      for (double delta : {-kPerturb, kPerturb}) {
        Vector xp = c.point.x;
        xp(i) += delta;
        const KktSolution sp = solve_lower(c.spec, xp, KktSeed{s.y, s.mu, s.lambda}, cfg);
        out.require(check_selector_family(c.spec, sp, family).singular == 0,
                    std::string(c.label) + " singular after perturbation " + fmt(delta));
      }
    }
  }
  out.require(covered > 0, "no fixture candidate satisfies Assumption A");
  if (out.pass) out.detail = std::to_string(covered) + " candidates, min pivot " + fmt(min_pivot);
  return out;
}

Outcome newton_convergence() {
  Outcome out;
  const KktSolution s =
      solve_lower(fixtures::p1(), vec({0.3}), KktSeed{vec({0}), Vector(), vec({0})}, CheckConfig{});
  std::string trace;
  for (double r : s.trace) trace += (trace.empty() ? "" : ", ") + fmt(r);
  for (std::size_t k = 0; k + 1 < s.trace.size(); ++k) {
    if (s.trace[k + 1] <= kRoundoffFloor) break;
    out.require(s.trace[k + 1] <= kQuadConst * s.trace[k] * s.trace[k], "not quadratic at step " + std::to_string(k));
  }
  out.require(s.residual <= kTerminal, "terminal residual " + fmt(s.residual));
  out.require(s.iterations <= kMaxNewton, std::to_string(s.iterations) + " iterations");
  if (out.pass) out.detail = std::to_string(s.iterations) + " iterations, residuals " + trace;
  return out;
}

Outcome certify_outcomes() {
  Outcome out;
  struct Case {
    const char* label;
    ProblemSpec spec;
    CandidatePoint point;
    std::function<bool(const CertificateReport&)> ok;
  };
  const std::vector<Case> cases = {
      {"P1(0,0) certified", fixtures::p1(), candidate({0}, {0}),
       [](const CertificateReport& r) { return r.verdict == OverallVerdict::Certified; }},
      {"P2(0,0) necessary-pass", fixtures::p2(), candidate({0}, {0}),
       [](const CertificateReport& r) { return r.verdict == OverallVerdict::NecessaryPass; }},
      {"P1(0.5,0.5) refuted", fixtures::p1(), candidate({0.5}, {0.5}),
       [](const CertificateReport& r) { return r.verdict == OverallVerdict::Refuted; }},
      {"P3(0,0) MFCQ violated", fixtures::p3(), candidate({0}, {0}),
       [](const CertificateReport& r) {
         const ConditionResult* m = r.find("upper_mfcq");
         return m && m->violated();
       }}};
  double slowest = 0.0;
  for (const auto& c : cases) {
    const auto t0 = Clock::now();
    const CertificateReport r = certify(c.spec, c.point, CheckConfig{});
    const double elapsed = seconds_since(t0);
    slowest = std::max(slowest, elapsed);
    out.require(c.ok(r), std::string(c.label) + ": got " + to_string(r.verdict));
    out.require(elapsed < kBudgetCertify, std::string(c.label) + " took " + fmt(elapsed) + " s");
  }
  if (out.pass) out.detail = "4 outcomes as expected, slowest " + fmt(slowest) + " s";
  return out;
}

Outcome oracle_concordance() {
  Outcome out;
  GridSpec grid;
  grid.radius = 0.1;
  grid.step = 1e-3;
  grid.tol = 1e-9;
  int certified = 0;
  for (const auto& c : fixture_candidates()) {
    const CertificateReport r = certify(c.spec, c.point, CheckConfig{});
    if (r.verdict != OverallVerdict::Certified) continue;
    ++certified;
    const DefinitionCheck d = verify_minimax_definition(c.spec, c.point.x, c.point.y, grid);
    out.require(d.pass, std::string(c.label) + " oracle violation " + fmt(d.worst_violation) + " on the " + d.side);
  }
  out.require(certified > 0, "no certified fixture candidate");
  if (out.pass) out.detail = std::to_string(certified) + " certified candidates confirmed";
  return out;
}

Outcome symbolic_derivatives() {
  Outcome out;
  std::mt19937_64 rng(7031);
  std::uniform_real_distribution<double> coord(-1.5, 1.5);
  double worst = 0.0;
  for (int trial = 0; trial < kPolyCount; ++trial) {
    const Expr p = testing::random_polynomial(rng);
    const Vector x = vec({coord(rng), coord(rng)});
    const Vector y = vec({coord(rng)});
    auto eval = [&](const Expr& e, const Vector& xv, const Vector& yv) {
      return e.evaluate({xv.data(), static_cast<std::size_t>(xv.size())}, {yv.data(), static_cast<std::size_t>(yv.size())});
    };
    for (int v = 0; v < 3; ++v) {
      const VarId id = v < 2 ? VarId{VarKind::X, v} : VarId{VarKind::Y, 0};
      const double h = 1e-6;
      Vector xp = x, xm = x, yp = y, ym = y;
      (v < 2 ? xp(v) : yp(0)) += h;
      (v < 2 ? xm(v) : ym(0)) -= h;
      const double fd = (eval(p, xp, yp) - eval(p, xm, ym)) / (2 * h);
      const double sym = eval(p.derivative(id), x, y);
      const double rel = std::fabs(sym - fd) / std::max(1.0, std::fabs(sym));
      worst = std::max(worst, rel);
    }
  }
  out.require(worst <= kPolyTol, "relative error " + fmt(worst));
  if (out.pass) out.detail = std::to_string(kPolyCount) + " polynomials, max relative error " + fmt(worst);
  return out;
}

Outcome deterministic_reports() {
  Outcome out;
  CheckConfig cfg;
  cfg.run_oracle = true;
  for (const auto& c : fixture_candidates()) {
    const std::string a = dump_report(certify(c.spec, c.point, cfg));
    const std::string b = dump_report(certify(c.spec, c.point, cfg));
    out.require(a == b, std::string(c.label) + " reports differ");
  }
  if (out.pass) out.detail = "byte-identical JSON for every fixture candidate";
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"value-function derivatives match finite differences", value_function_derivatives},
      {"worked examples P1 and P2", worked_examples},
      {"selector nonsingularity under Assumption A", selector_nonsingularity},
      {"quadratic Newton convergence on P1", newton_convergence},
      {"certify outcomes on the fixtures", certify_outcomes},
      {"certified verdicts confirmed by the definition oracle", oracle_concordance},
      {"symbolic derivatives of random polynomials", symbolic_derivatives},
      {"deterministic JSON reports", deterministic_reports},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
