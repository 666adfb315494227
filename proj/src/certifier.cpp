#include "minimax/certifier.hpp"

#include <cmath>
#include <sstream>

#include "minimax/generalized_jacobian.hpp"
#include "minimax/oracle.hpp"
#include "minimax/upper_level.hpp"
#include "minimax/value_function.hpp"

namespace mmx {

const char* to_string(OverallVerdict v) {
  switch (v) {
    case OverallVerdict::Certified:
      return "certified-local-minimax";
    case OverallVerdict::NecessaryPass:
      return "necessary-conditions-pass";
    case OverallVerdict::Refuted:
      return "refuted";
    case OverallVerdict::Inconclusive:
      return "inconclusive";
    case OverallVerdict::Pass:
      return "pass";
    case OverallVerdict::Fail:
      return "fail";
  }
  return "?";
}

OverallVerdict overall_from_string(const std::string& s) {
  for (auto v : {OverallVerdict::Certified, OverallVerdict::NecessaryPass, OverallVerdict::Refuted,
                 OverallVerdict::Inconclusive, OverallVerdict::Pass, OverallVerdict::Fail}) {
    if (s == to_string(v)) return v;
  }
  throw std::invalid_argument("unknown overall verdict '" + s + "'");
}

int exit_code(OverallVerdict v) {
  switch (v) {
    case OverallVerdict::Certified:
    case OverallVerdict::NecessaryPass:
    case OverallVerdict::Pass:
      return 0;
    case OverallVerdict::Refuted:
    case OverallVerdict::Fail:
      return 2;
    case OverallVerdict::Inconclusive:
      return 3;
  }
  return 3;
}

const char* to_string(CertPath p) {
  switch (p) {
    case CertPath::Smooth:
      return "smooth";
    case CertPath::Nonsmooth:
      return "nonsmooth";
    case CertPath::Invalid:
      return "invalid";
  }
  return "?";
}

CertPath path_from_string(const std::string& s) {
  for (auto p : {CertPath::Smooth, CertPath::Nonsmooth, CertPath::Invalid}) {
    if (s == to_string(p)) return p;
  }
  throw std::invalid_argument("unknown path '" + s + "'");
}

const ConditionResult* CertificateReport::find(const std::string& name) const {
  for (const auto& r : results) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

const Vector* CertificateReport::quantity(const std::string& name) const {
  for (const auto& q : quantities) {
    if (q.first == name) return &q.second;
  }
  return nullptr;
}

OverallVerdict compute_verdict(const std::vector<ConditionResult>& results) {
  bool any_necessary = false;
  bool necessary_open = false;
  bool sufficient = false;
  for (const auto& r : results) {
    if (r.role == CheckRole::Necessary) {
      if (r.violated()) return OverallVerdict::Refuted;
      any_necessary = true;
      necessary_open = necessary_open || !r.satisfied();
    }
    if (r.role == CheckRole::Sufficient && r.satisfied()) sufficient = true;
  }
  if (sufficient) return OverallVerdict::Certified;
  if (any_necessary && !necessary_open) return OverallVerdict::NecessaryPass;
  return OverallVerdict::Inconclusive;
}

namespace {

ConditionResult make(const std::string& name, CheckRole role, Verdict status, double margin, double tol,
                     std::string detail) {
  ConditionResult c;
  c.name = name;
  c.role = role;
  c.status = status;
  c.margin = margin;
  c.tolerance = tol;
  c.detail = std::move(detail);
  return c;
}

Vector flatten(const Matrix& m) {
  Vector v(m.size());
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) v(i * m.cols() + j) = m(i, j);
  }
  return v;
}

// Feasibility of (x, y): the largest constraint violation.
ConditionResult feasibility(const ProblemSpec& spec, const CandidatePoint& c, const CheckConfig& config) {
  const DerivativeBundle b = eval_bundle(spec, c.x, c.y);
  double worst = 0.0;
  std::string where = "none";
  auto check = [&](const Vector& v, bool equality, const char* name) {
    for (int i = 0; i < v.size(); ++i) {
      const double viol = equality ? std::fabs(v(i)) : v(i);
      if (viol > worst) {
        worst = viol;
        where = std::string(name) + std::to_string(i + 1);
      }
    }
  };
  check(b.H_values(), true, "H");
  check(b.G_values(), false, "G");
  check(b.h_values(), true, "h");
  check(b.g_values(), false, "g");
  const bool ok = worst <= config.tol_act;
  return make("feasibility", CheckRole::Necessary, ok ? Verdict::Satisfied : Verdict::Violated, worst, config.tol_act,
              ok ? "x in Phi and y in Y(x)" : "largest violation at " + where);
}

struct LowerChoice {
  Vector mu;
  Vector lambda;
  std::optional<ConditionResult> candidate_check;
};

LowerChoice choose_multipliers(const ProblemSpec& spec, const CandidatePoint& c, const CheckConfig& config) {
  const MultiplierRecovery rec = recover_multipliers(spec, c.x, c.y, config);
  LowerChoice out{rec.mu, rec.lambda, std::nullopt};
  if (!c.mu && !c.lambda) return out;
  const Vector mu = c.mu ? *c.mu : rec.mu;
  const Vector lambda = c.lambda ? *c.lambda : rec.lambda;
  const double res = kkt_residual_lower(spec, c.x, c.y, mu, lambda).norm;
  bool sign_ok = lambda.size() == 0 || lambda.minCoeff() >= -config.tol_act;
  const double gap = std::max(mu.size() ? inf_norm(mu - rec.mu) : 0.0, lambda.size() ? inf_norm(lambda - rec.lambda) : 0.0);
  std::ostringstream msg;
  msg << "supplied KKT residual " << format_number(res) << ", distance to recovered multipliers " << format_number(gap);
  if (res <= config.tol_kkt && sign_ok) {
    out.mu = mu;
    out.lambda = lambda;
    msg << "; supplied multipliers used";
    out.candidate_check = make("candidate_lower_multipliers", CheckRole::Diagnostic, Verdict::Satisfied, res,
                               config.tol_kkt, msg.str());
  } else {
    msg << "; recovered multipliers used";
    out.candidate_check = make("candidate_lower_multipliers", CheckRole::Diagnostic, Verdict::Violated, res,
                               config.tol_kkt, msg.str());
  }
  return out;
}

std::string first_failure(const LowerConditionsReport& ju, const LowerConditionsReport& aa) {
  if (!ju.kkt.satisfied()) return "lower KKT fails: " + ju.kkt.detail;
  if (!ju.licq.satisfied()) return "lower LICQ fails";
  if (ju.strict_complementarity.satisfied() && !ju.sosc.satisfied()) return "lower SOSC fails";
  if (!aa.strong_sosc.satisfied()) return "strong SOSC fails";
  return "Assumption A fails";
}

PathClassification classify_with(const ProblemSpec& spec, const CandidatePoint& c, const CheckConfig& config,
                                 const LowerChoice& choice) {
  PathClassification p;
  p.jacobian_uniqueness = check_jacobian_uniqueness(spec, c.x, c.y, choice.mu, choice.lambda, config);
  p.assumption_a = check_assumption_a(spec, c.x, c.y, config);
  if (p.jacobian_uniqueness.jacobian_uniqueness()) {
    p.path = CertPath::Smooth;
    p.reason = "Jacobian uniqueness conditions hold";
  } else if (p.jacobian_uniqueness.kkt.satisfied() && p.assumption_a.assumption_a.satisfied() &&
             !p.jacobian_uniqueness.strict_complementarity.satisfied()) {
    p.path = CertPath::Nonsmooth;
    p.reason = "Assumption A holds without strict complementarity";
  } else {
    p.path = CertPath::Invalid;
    p.reason = first_failure(p.jacobian_uniqueness, p.assumption_a);
  }
  return p;
}

void check_upper_candidate(CertificateReport& rep, const CandidatePoint& c, const LambdaPolytope& poly,
                           const CheckConfig& config) {
  if (!c.u && !c.v) return;
  const int n1 = static_cast<int>(poly.JH.rows());
  const Vector u = c.u ? *c.u : Vector(poly.point.head(n1));
  const Vector v = c.v ? *c.v : Vector(poly.point.tail(poly.n2));
  const Vector r = poly.r0 + poly.JH.transpose() * u + poly.JG.transpose() * v;
  double off = 0.0;
  double neg = 0.0;
  for (int i = 0; i < v.size(); ++i) {
    bool active = false;
    for (int a : poly.active.active) active = active || a == i;
    if (!active) off = std::max(off, std::fabs(v(i)));
    neg = std::max(neg, -v(i));
  }
  const double worst = std::max({inf_norm(r), off, neg});
  rep.results.push_back(make("candidate_upper_multipliers", CheckRole::Diagnostic,
                             worst <= config.tol_kkt ? Verdict::Satisfied : Verdict::Violated, worst, config.tol_kkt,
                             "stationarity, sign and complementarity of the supplied (u, v)"));
}

void run_oracle(CertificateReport& rep, const ProblemSpec& spec, const CandidatePoint& c, const CheckConfig& config) {
  const Dimensions& d = spec.dims();
  if (d.n > 2 || d.m > 2) {
    rep.results.push_back(make("definition_oracle", CheckRole::Diagnostic, Verdict::Inconclusive, 0.0,
                               config.oracle_tol, "grid oracle needs n <= 2 and m <= 2"));
    return;
  }
  GridSpec g;
  g.radius = config.oracle_radius;
  g.step = config.oracle_step;
  g.eta = config.oracle_eta;
  g.tol = config.oracle_tol;
  const DefinitionCheck dc = verify_minimax_definition(spec, c.x, c.y, g);
  std::ostringstream msg;
  msg << "delta0 " << format_number(g.radius) << ", step " << format_number(dc.effective_step) << ", eta(delta) = "
      << format_number(g.eta) << " delta";
  if (!dc.pass) msg << "; worst violation on the " << dc.side << " inequality at delta " << format_number(dc.delta);
  ConditionResult r = make("definition_oracle", CheckRole::Diagnostic, dc.pass ? Verdict::Satisfied : Verdict::Violated,
                           dc.worst_violation, g.tol, msg.str());
  if (!dc.pass) r.witness = dc.side == "left" ? *dc.witness_y : *dc.witness_x;
  rep.results.push_back(r);
}

void smooth_stages(CertificateReport& rep, const ProblemSpec& spec, const CandidatePoint& c, const LowerChoice& choice,
                   const CheckConfig& config, std::string& stage) {
  stage = "lower_newton_refinement";
  const KktSolution sol = solve_lower(spec, c.x, KktSeed{c.y, choice.mu, choice.lambda}, config);
  const double moved = inf_norm(sol.y - c.y);
  rep.results.push_back(make(stage, CheckRole::Diagnostic, moved <= 1e-6 ? Verdict::Satisfied : Verdict::Violated,
                             sol.residual, config.tol_newton,
                             std::string(sol.solver) + " Newton, " + std::to_string(sol.iterations) +
                                 " iterations, |y - y*| = " + format_number(moved)));
  rep.quantities.push_back({"y_tracked", sol.y});
  rep.quantities.push_back({"mu", sol.mu});
  rep.quantities.push_back({"lambda", sol.lambda});

  stage = "sensitivity_system";
  const SensitivitySystem sys = assemble_sensitivity_system(spec, sol, config.cond_warning);
  std::ostringstream sm;
  sm << "order " << sys.K.rows() << ", condition estimate " << format_number(sys.condition);
  if (sys.ill_conditioned) sm << " (above warning threshold " << format_number(config.cond_warning) << ")";
  rep.results.push_back(make(stage, CheckRole::Hypothesis,
                             sys.pivots.nonsingular ? Verdict::Satisfied : Verdict::Violated, sys.pivots.min_pivot,
                             kPivotTolerance * sys.pivots.scale, sm.str()));
  if (!sys.pivots.nonsingular) return;

  stage = "value_function";
  const Vector grad = phi_gradient(spec, sol);
  double asym = 0.0;
  const Matrix hess = phi_hessian(spec, sol, sys, &asym);
  rep.quantities.push_back({"phi_gradient", grad});
  rep.quantities.push_back({"phi_hessian", flatten(hess)});

  stage = "upper_mfcq";
  const MfcqResult mfcq = check_mfcq(spec, c.x, config);
  rep.results.push_back(mfcq.result);
  const CheckRole gated = mfcq.result.satisfied() ? CheckRole::Necessary : CheckRole::Diagnostic;

  stage = "upper_first_order";
  const LambdaPolytope poly = upper_kkt_and_polytope(spec, c.x, grad, config);
  {
    std::ostringstream msg;
    if (poly.nonempty) {
      msg << "Lambda nonempty";
      if (poly.enumerated) msg << ", " << poly.vertices.size() << " vertices";
      msg << (poly.bounded ? ", bounded" : ", unbounded");
    } else {
      msg << "Lambda empty; descent value " << format_number(poly.descent_value);
    }
    ConditionResult r = make(stage, gated, poly.nonempty ? Verdict::Satisfied : Verdict::Violated, poly.fit_residual,
                             config.tol_kkt, msg.str());
    if (!poly.nonempty) r.witness = poly.descent_direction;
    rep.results.push_back(r);
  }
  if (poly.nonempty) {
    rep.quantities.push_back({"upper_u", poly.point.head(spec.dims().n1)});
    rep.quantities.push_back({"upper_v", poly.point.tail(spec.dims().n2)});
  }
  check_upper_candidate(rep, c, poly, config);

  stage = "upper_second_order";
  const UpperConeRep cone = critical_cone_upper(spec, c.x, grad, poly, config);
  SecondOrderResult nec = second_order_necessary(spec, c.x, hess, poly, cone, config);
  nec.result.role = gated;
  rep.results.push_back(nec.result);
  SecondOrderResult suf = second_order_sufficient(spec, c.x, hess, poly, cone, config);
  if (suf.result.satisfied() && !suf.vacuous) {
    suf.result.detail += "; growth estimate gamma2 = " + format_number(suf.gamma2);
  }
  rep.results.push_back(suf.result);
}

void nonsmooth_stages(CertificateReport& rep, const ProblemSpec& spec, const CandidatePoint& c,
                      const LowerChoice& choice, const CheckConfig& config, std::string& stage) {
  stage = "lower_newton_refinement";
  const KktSolution sol = solve_lower(spec, c.x, KktSeed{c.y, choice.mu, choice.lambda}, config);
  const double moved = inf_norm(sol.y - c.y);
  rep.results.push_back(make(stage, CheckRole::Diagnostic, moved <= 1e-6 ? Verdict::Satisfied : Verdict::Violated,
                             sol.residual, config.tol_newton,
                             std::string(sol.solver) + " Newton, " + std::to_string(sol.iterations) +
                                 " iterations, |y - y*| = " + format_number(moved)));
  rep.quantities.push_back({"y_tracked", sol.y});
  rep.quantities.push_back({"mu", sol.mu});
  rep.quantities.push_back({"lambda", sol.lambda});

  stage = "selector_nonsingularity";
  const ActivePartition part = solution_partition(spec, sol, config.tol_act);
  std::vector<WSelector> family = enumerate_b_selectors(part, config.beta_cap);
  const int b_count = static_cast<int>(family.size());
  for (auto& w : clarke_selectors(part, config.beta_resolution, config.beta_cap)) {
    if (!w.binary()) family.push_back(std::move(w));
  }
  const NonsingularitySummary ns = check_selector_family(spec, sol, family);
  std::ostringstream msg;
  msg << b_count << " B-selectors and " << (ns.checked - b_count) << " Clarke samples, " << ns.singular
      << " singular";
  rep.results.push_back(make(stage, CheckRole::Hypothesis, ns.singular == 0 ? Verdict::Satisfied : Verdict::Violated,
                             ns.min_pivot, kPivotTolerance, msg.str()));

  stage = "upper_mfcq";
  const MfcqResult mfcq = check_mfcq(spec, c.x, config);
  rep.results.push_back(mfcq.result);

  stage = "upper_first_order_nonsmooth";
  NonsmoothFirstOrder fo = first_order_nonsmooth_necessary(spec, c.x, sol, config);
  if (!mfcq.result.satisfied()) fo.result.role = CheckRole::Diagnostic;
  rep.results.push_back(fo.result);
  if (fo.selector) {
    rep.quantities.push_back({"selector_W", fo.selector->diag});
    rep.quantities.push_back({"phi_candidate_gradient", fo.candidate_gradient});
    rep.quantities.push_back({"upper_u", fo.u});
    rep.quantities.push_back({"upper_v", fo.v});
  }
}

}  // namespace

PathClassification classify_path(const ProblemSpec& spec, const CandidatePoint& candidate, const CheckConfig& config) {
  validate_candidate(spec, candidate);
  require_smooth(spec);
  const ConditionResult feas = feasibility(spec, candidate, config);
  if (feas.violated()) throw std::invalid_argument("candidate is infeasible: " + feas.detail);
  return classify_with(spec, candidate, config, choose_multipliers(spec, candidate, config));
}

CertificateReport certify(const ProblemSpec& spec, const CandidatePoint& candidate, const CheckConfig& config) {
  config.validate();
  validate_candidate(spec, candidate);
  require_smooth(spec);
  CertificateReport rep;
  rep.problem_digest = problem_digest(spec);
  rep.config = config;
  rep.candidate = candidate;

  std::string stage = "feasibility";
  try {
    rep.results.push_back(feasibility(spec, candidate, config));
    if (rep.results.back().violated()) {
      rep.path_reason = "candidate is infeasible";
    } else {
      stage = "lower_level";
      const LowerChoice choice = choose_multipliers(spec, candidate, config);
      if (choice.candidate_check) rep.results.push_back(*choice.candidate_check);
      const PathClassification pc = classify_with(spec, candidate, config, choice);
      rep.path = pc.path;
      rep.path_reason = pc.reason;
      for (const auto& r : pc.jacobian_uniqueness.all()) rep.results.push_back(r);
      for (const auto* r : {&pc.assumption_a.strong_sosc, &pc.assumption_a.assumption_a}) {
        if (!r->name.empty()) rep.results.push_back(*r);
      }
      if (rep.path == CertPath::Smooth) {
        smooth_stages(rep, spec, candidate, choice, config, stage);
      } else if (rep.path == CertPath::Nonsmooth) {
        nonsmooth_stages(rep, spec, candidate, choice, config, stage);
      }
      if (config.run_oracle) {
        stage = "definition_oracle";
        run_oracle(rep, spec, candidate, config);
      }
    }
  } catch (const std::exception& e) {
    rep.results.push_back(make("stage_error", CheckRole::Diagnostic, Verdict::Inconclusive, 0.0, 0.0,
                               "stage " + stage + ": " + e.what()));
  }
  rep.verdict = compute_verdict(rep.results);
  return rep;
}

}  // namespace mmx
