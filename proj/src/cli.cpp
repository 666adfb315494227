#include "minimax/cli.hpp"

#include <atomic>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "minimax/generalized_jacobian.hpp"
#include "minimax/oracle.hpp"
#include "minimax/report.hpp"
#include "minimax/value_function.hpp"

namespace mmx {

namespace {

constexpr double kFdGradientTol = 1e-6;
constexpr double kFdHessianTol = 1e-4;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

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

// Pass when every non-diagnostic result holds, fail when one is violated.
OverallVerdict pass_fail(const std::vector<ConditionResult>& results) {
  bool open = false;
  bool any = false;
  for (const auto& r : results) {
    if (r.role == CheckRole::Diagnostic) continue;
    any = true;
    if (r.violated()) return OverallVerdict::Fail;
    open = open || !r.satisfied();
  }
  return any && !open ? OverallVerdict::Pass : OverallVerdict::Inconclusive;
}

CertPath cert_path(const KktSolution& sol) {
  return sol.path == SolutionPath::Smooth ? CertPath::Smooth : CertPath::Nonsmooth;
}

void add_solution(CertificateReport& rep, const KktSolution& sol) {
  rep.quantities.push_back({"y", sol.y});
  rep.quantities.push_back({"w", sol.w});
  rep.quantities.push_back({"mu", sol.mu});
  rep.quantities.push_back({"lambda", sol.lambda});
}

KktSeed seed_of(const CandidatePoint& c) {
  return KktSeed{c.y, c.mu ? *c.mu : Vector(), c.lambda ? *c.lambda : Vector()};
}

void solve_lower_report(CertificateReport& rep, const ProblemSpec& spec, const CandidatePoint& c,
                        const CheckConfig& config) {
  try {
    const KktSolution sol = solve_lower(spec, c.x, seed_of(c), config);
    rep.path = cert_path(sol);
    rep.path_reason = std::string(sol.solver) + " Newton";
    std::ostringstream msg;
    msg << sol.iterations << " iterations, terminal residual " << format_number(sol.residual);
    const bool ok = sol.residual <= config.tol_newton;
    rep.results.push_back(make("newton_convergence", CheckRole::Necessary, ok ? Verdict::Satisfied : Verdict::Violated,
                               sol.residual, config.tol_newton, msg.str()));
    add_solution(rep, sol);
    rep.quantities.push_back({"residual_trace", Eigen::Map<const Vector>(sol.trace.data(), sol.trace.size())});
  } catch (const NewtonError& e) {
    rep.results.push_back(make("newton_convergence", CheckRole::Necessary, Verdict::Violated,
                               e.trace().empty() ? kInf : e.trace().back(), config.tol_newton, e.what()));
    rep.quantities.push_back({"residual_trace", Eigen::Map<const Vector>(e.trace().data(), e.trace().size())});
  }
}

void value_derivs_report(CertificateReport& rep, const ProblemSpec& spec, const CandidatePoint& c,
                         const CheckConfig& config) {
  const KktSolution sol = solve_lower(spec, c.x, seed_of(c), config);
  rep.path = cert_path(sol);
  rep.path_reason = std::string(sol.solver) + " Newton";
  add_solution(rep, sol);
  const TrackedValueFunction phi(spec, sol, config);
  const FdResult fd = fd_derivatives([&](const Vector& x) { return phi(x); }, c.x, config.fd_step, config.fd_hess_step);
  rep.quantities.push_back({"phi", Vector::Constant(1, phi_value(spec, sol))});
  rep.quantities.push_back({"fd_gradient", fd.gradient});
  rep.quantities.push_back({"fd_hessian", Eigen::Map<const Vector>(fd.hessian.data(), fd.hessian.size())});
  if (sol.path == SolutionPath::Smooth) {
    const SensitivitySystem sys = assemble_sensitivity_system(spec, sol, config.cond_warning);
    const Vector grad = phi_gradient(spec, sol);
    rep.quantities.push_back({"phi_gradient", grad});
    const double gerr = inf_norm(grad - fd.gradient);
    rep.results.push_back(make("fd_gradient_agreement", CheckRole::Necessary,
                               gerr <= kFdGradientTol ? Verdict::Satisfied : Verdict::Violated, gerr, kFdGradientTol,
                               "max |grad phi - FD gradient|"));
    if (!sys.pivots.nonsingular) {
      rep.results.push_back(make("fd_hessian_agreement", CheckRole::Necessary, Verdict::Inconclusive, 0.0,
                                 kFdHessianTol, "K(x) is singular"));
      return;
    }
    const Matrix hess = phi_hessian(spec, sol, sys);
    rep.quantities.push_back({"phi_hessian", Eigen::Map<const Vector>(hess.data(), hess.size())});
    const double herr = (hess - fd.hessian).cwiseAbs().maxCoeff();
    rep.results.push_back(make("fd_hessian_agreement", CheckRole::Necessary,
                               herr <= kFdHessianTol ? Verdict::Satisfied : Verdict::Violated, herr, kFdHessianTol,
                               "max |hess phi - FD Hessian|"));
    return;
  }
  // Nonsmooth: compare the FD gradient with the nearest B-subdifferential candidate.
  const GeneralizedDerivativeSet set = phi_generalized_gradients(spec, sol, config);
  double best = kInf;
  for (const auto& m : set.members) {
    if (m.singular) continue;
    rep.quantities.push_back({"candidate_gradient" + m.selector.label(), m.value.col(0)});
    best = std::min(best, inf_norm(Vector(m.value.col(0)) - fd.gradient));
  }
  rep.results.push_back(make("fd_gradient_candidate_distance", CheckRole::Diagnostic,
                             best <= kFdGradientTol ? Verdict::Satisfied : Verdict::Inconclusive, best, kFdGradientTol,
                             "distance from the FD gradient to the nearest B-subdifferential candidate"));
}

void oracle_report(CertificateReport& rep, const ProblemSpec& spec, const CandidatePoint& c,
                   const CheckConfig& config) {
  GridSpec g;
  g.radius = config.oracle_radius;
  g.step = config.oracle_step;
  g.eta = config.oracle_eta;
  g.tol = config.oracle_tol;
  const DefinitionCheck dc = verify_minimax_definition(spec, c.x, c.y, g);
  std::ostringstream msg;
  msg << "delta0 " << format_number(g.radius) << ", step " << format_number(dc.effective_step) << ", eta(delta) = "
      << format_number(g.eta) << " delta, " << dc.evaluations << " evaluations, " << dc.empty_inner
      << " empty inner grids";
  if (!dc.pass) msg << "; worst violation on the " << dc.side << " inequality at delta " << format_number(dc.delta);
  ConditionResult r = make("definition_oracle", CheckRole::Necessary, dc.pass ? Verdict::Satisfied : Verdict::Violated,
                           dc.worst_violation, g.tol, msg.str());
  if (!dc.pass) {
    r.witness = dc.side == "left" ? *dc.witness_y : *dc.witness_x;
    rep.quantities.push_back({"witness_x", *dc.witness_x});
    rep.quantities.push_back({"witness_y", *dc.witness_y});
  }
  rep.results.push_back(r);
}

void subdiff_report(CertificateReport& rep, const ProblemSpec& spec, const CandidatePoint& c,
                    const CheckConfig& config) {
  const KktSolution sol = solve_lower(spec, c.x, seed_of(c), config);
  rep.path = cert_path(sol);
  rep.path_reason = std::string(sol.solver) + " Newton";
  add_solution(rep, sol);
  const GeneralizedDerivativeSet set = phi_generalized_gradients(spec, sol, config, DerivativeKind::OuterApprox);
  for (const auto& m : set.members) {
    const std::string label = m.selector.label();
    rep.results.push_back(make("selector" + label, CheckRole::Necessary,
                               m.singular ? Verdict::Violated : Verdict::Satisfied, m.pivots.min_pivot,
                               kPivotTolerance * m.pivots.scale,
                               m.selector.binary() ? "B-subdifferential selector" : "Clarke sample"));
    if (!m.singular) rep.quantities.push_back({"candidate_gradient" + label, m.value.col(0)});
  }
}

}  // namespace

Vector parse_vector(const std::string& text) {
  std::vector<double> values;
  if (text.find_first_not_of(" \t") == std::string::npos) return Vector(0);
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    std::string item = text.substr(pos, end - pos);
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    if (first == std::string::npos) throw UsageError("empty entry in '" + text + "'");
    item = item.substr(first, last - first + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || ptr != item.data() + item.size() || !std::isfinite(v)) {
      throw UsageError("not a real number: '" + item + "'");
    }
    values.push_back(v);
    pos = end + 1;
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

CertificateReport run_command(const std::string& command, const ProblemSpec& spec, const CandidatePoint& candidate,
                              const CheckConfig& config) {
  if (command == "certify") return certify(spec, candidate, config);
  validate_candidate(spec, candidate);
  CertificateReport rep;
  rep.command = command;
  rep.problem_digest = problem_digest(spec);
  rep.config = config;
  rep.candidate = candidate;
  try {
    if (command == "solve-lower") {
      solve_lower_report(rep, spec, candidate, config);
    } else if (command == "value-derivs") {
      value_derivs_report(rep, spec, candidate, config);
    } else if (command == "oracle") {
      oracle_report(rep, spec, candidate, config);
    } else if (command == "subdiff") {
      subdiff_report(rep, spec, candidate, config);
    } else {
      throw UsageError("unknown command '" + command + "'");
    }
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    rep.results.push_back(make("stage_error", CheckRole::Diagnostic, Verdict::Inconclusive, 0.0, 0.0,
                               "stage " + command + ": " + e.what()));
  }
  rep.verdict = pass_fail(rep.results);
  return rep;
}

int run(const RunRequest& req, std::ostream& out, std::ostream& err) {
  try {
    ProblemSpec spec = [&] {
      const std::string text = read_file(req.problem_path);
      try {
        return parse_problem(text);
      } catch (const ParseError& e) {
        throw UsageError(req.problem_path + ": " + e.what());
      } catch (const SpecError& e) {
        throw UsageError(req.problem_path + ": " + e.what());
      }
    }();
    if (req.command == "validate") {
      const Dimensions& d = spec.dims();
      out << "valid problem " << problem_digest(spec) << ": n=" << d.n << " m=" << d.m << " m1=" << d.m1
          << " m2=" << d.m2 << " n1=" << d.n1 << " n2=" << d.n2 << (spec.contains_abs() ? " (uses abs)" : "") << "\n";
      return 0;
    }

    CheckConfig config;
    if (req.config_path) config.apply_overrides(read_file(*req.config_path));
    if (req.seed) config.seed = *req.seed;
    config.validate();

    if (req.x.empty()) throw UsageError("--x is required");
    const std::size_t count = req.x.size();
    const bool y_optional = req.command == "solve-lower" || req.command == "value-derivs" ||
                            req.command == "subdiff" || spec.dims().m == 0;
    if (req.y.empty() ? !y_optional : req.y.size() != count) {
      throw UsageError("--x and --y must be given the same number of times");
    }
    if (count > 1 && req.command != "certify") throw UsageError("only certify accepts several candidates");
    std::vector<CandidatePoint> cands(count);
    for (std::size_t i = 0; i < count; ++i) {
      CandidatePoint& c = cands[i];
      c.x = parse_vector(req.x[i]);
      c.y = i < req.y.size() ? parse_vector(req.y[i]) : Vector(Vector::Zero(spec.dims().m));
      if (req.mu) c.mu = parse_vector(*req.mu);
      if (req.lambda) c.lambda = parse_vector(*req.lambda);
      if (req.u) c.u = parse_vector(*req.u);
      if (req.v) c.v = parse_vector(*req.v);
      try {
        validate_candidate(spec, c);
      } catch (const SpecError& e) {
        throw UsageError(e.what());
      }
    }
    if (req.command != "certify" && req.command != "solve-lower" && req.command != "value-derivs" &&
        req.command != "oracle" && req.command != "subdiff") {
      throw UsageError("unknown command '" + req.command + "'");
    }

    std::vector<CertificateReport> reports(count);
    std::vector<std::string> failures(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          reports[i] = run_command(req.command, spec, cands[i], config);
        } catch (const std::exception& e) {
          failures[i] = e.what();
        }
      }
    };
    const int jobs = std::max(1, std::min<int>(req.jobs, static_cast<int>(count)));
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& f : failures) {
      if (!f.empty()) throw UsageError(f);
    }

    int code = 0;
    Json doc = Json::array();
    for (std::size_t i = 0; i < count; ++i) {
      if (i) out << "\n";
      out << render_summary(reports[i]);
      const int c = exit_code(reports[i].verdict);
      if (c == 2 || (c == 3 && code == 0)) code = c;
      doc.push_back(to_json(reports[i]));
    }
    if (req.json_path) {
      std::ofstream f(*req.json_path, std::ios::binary);
      if (!f) throw UsageError("cannot write '" + *req.json_path + "'");
      f << (count == 1 ? doc[0] : doc).dump(2) << "\n";
    }
    return code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mmx
