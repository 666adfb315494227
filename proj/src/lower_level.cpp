#include "minimax/lower_level.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mmx {

LagrangianEval lagrangian(const DerivativeBundle& b, const Vector& mu, const Vector& lambda) {
  LagrangianEval l;
  l.value = b.f.value;
  l.grad_y = b.f.dy;
  l.grad_x = b.f.dx;
  l.hess_yy = b.f.dyy;
  l.hess_yx = b.f.dxy.transpose();
  l.hess_xx = b.f.dxx;
  auto add = [&l](const FunctionDerivatives& c, double weight) {
    if (weight == 0.0) return;
    l.value += weight * c.value;
    l.grad_y += weight * c.dy;
    l.grad_x += weight * c.dx;
    l.hess_yy += weight * c.dyy;
    l.hess_yx += weight * c.dxy.transpose();
    l.hess_xx += weight * c.dxx;
  };
  for (std::size_t i = 0; i < b.h.size(); ++i) add(b.h[i], mu(static_cast<int>(i)));
  for (std::size_t i = 0; i < b.g.size(); ++i) add(b.g[i], -lambda(static_cast<int>(i)));
  return l;
}

ActivePartition classify_partition(const Vector& g, const Vector& lambda, double tol_act) {
  if (g.size() != lambda.size()) throw std::invalid_argument("classify_partition: length mismatch");
  ActivePartition p;
  p.tol_act = tol_act;
  p.size = static_cast<int>(g.size());
  for (int i = 0; i < g.size(); ++i) {
    if (g(i) > tol_act) throw PartitionError(i, "infeasible inequality (g = " + format_number(g(i)) + ")");
    if (lambda(i) < -tol_act) throw PartitionError(i, "negative multiplier (lambda = " + format_number(lambda(i)) + ")");
    if (g(i) >= -tol_act) {
      p.active.push_back(i);
      (lambda(i) > tol_act ? p.alpha : p.beta).push_back(i);
    } else if (lambda(i) <= tol_act) {
      p.gamma.push_back(i);
    } else {
      throw PartitionError(i, "positive multiplier on an inactive constraint");
    }
  }
  return p;
}

namespace {

Matrix select_rows(const Matrix& m, const std::vector<int>& idx) {
  Matrix out(static_cast<int>(idx.size()), m.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<int>(k)) = m.row(idx[k]);
  return out;
}

Vector kkt_residual_vector(const DerivativeBundle& b, const Vector& mu, const Vector& lambda) {
  const LagrangianEval l = lagrangian(b, mu, lambda);
  const Vector h = b.h_values();
  const Vector g = b.g_values();
  Vector r(l.grad_y.size() + h.size() + g.size());
  r << l.grad_y, h, g - (lambda + g).cwiseMin(0.0);
  return r;
}

ConditionResult make(const std::string& name, CheckRole role, double margin, double tol) {
  ConditionResult c;
  c.name = name;
  c.role = role;
  c.margin = margin;
  c.tolerance = tol;
  return c;
}

// Two-sided negativity test of d^T M d over a polyhedral cone.
// strict = true asks for d^T M d <= -tol (sufficient form), otherwise <= tol.
void cone_curvature(ConditionResult& out, const Matrix& m, const PolyhedralCone& cone, bool strict,
                    const CheckConfig& config) {
  const double tol = config.tol_pd;
  const ConeStructure s = analyze_cone(cone, 1e-9);
  const double threshold = strict ? -tol : tol;
  const double aff_max = max_eigenvalue_on_subspace(m, s.lineality);
  out.margin = aff_max;
  if (s.subspace()) {
    if (aff_max <= threshold) {
      out.status = Verdict::Satisfied;
      out.detail = s.lineality.cols() == 0 ? "critical cone is {0}" : "max eigenvalue on the critical subspace";
    } else {
      out.status = Verdict::Violated;
      out.witness = extreme_eigenvector_on_subspace(m, s.lineality, true);
      out.detail = "max eigenvalue on the critical subspace";
    }
    return;
  }
  if (aff_max <= threshold) {
    out.status = Verdict::Satisfied;
    out.detail = "max eigenvalue on aff C bounds the cone";
    return;
  }
  ConeSampleOptions opt;
  opt.random_count = config.lower_cone_samples;
  opt.face_cap = config.face_cap;
  opt.seed = config.seed;
  double best = -kInf;
  Vector arg;
  for (const Vector& d : sample_cone(s, opt)) {
    const double q = d.dot(m * d);
    if (q > best) {
      best = q;
      arg = d;
    }
  }
  out.margin = best;
  std::ostringstream msg;
  msg << "aff C test failed (max eigenvalue " << format_number(aff_max) << "); sampled cone max "
      << format_number(best);
  out.detail = msg.str();
  if (arg.size() > 0 && best > threshold) {
    out.status = Verdict::Violated;
    out.witness = arg;
  } else {
    out.status = Verdict::Inconclusive;
  }
}

}  // namespace

KktResidual kkt_residual_lower(const ProblemSpec& spec, const Vector& x, const Vector& y, const Vector& mu,
                               const Vector& lambda) {
  const DerivativeBundle b = eval_bundle(spec, x, y);
  if (mu.size() != spec.dims().m1 || lambda.size() != spec.dims().m2) {
    throw std::invalid_argument("kkt_residual_lower: multiplier dimension mismatch");
  }
  KktResidual r;
  r.residual = kkt_residual_vector(b, mu, lambda);
  r.norm = inf_norm(r.residual);
  return r;
}

MultiplierRecovery recover_multipliers(const ProblemSpec& spec, const Vector& x, const Vector& y,
                                       const CheckConfig& config) {
  const Dimensions& d = spec.dims();
  const DerivativeBundle b = eval_bundle(spec, x, y);
  const Vector g = b.g_values();
  std::vector<int> active;
  bool feasible = inf_norm(b.h_values()) <= config.tol_act;
  for (int i = 0; i < d.m2; ++i) {
    if (g(i) > config.tol_act) feasible = false;
    if (std::fabs(g(i)) <= config.tol_act) active.push_back(i);
  }
  const Matrix jh = b.h_jac_y();
  const Matrix jg_active = select_rows(b.g_jac_y(), active);
  Matrix rows(d.m1 + static_cast<int>(active.size()), d.m);
  rows << jh, jg_active;

  MultiplierRecovery out;
  out.sigma_min = smallest_row_singular_value(rows);
  out.licq = out.sigma_min >= config.tol_licq;
  Matrix a(d.m, rows.rows());
  a << jh.transpose(), -jg_active.transpose();
  const Vector z = rows.rows() > 0 ? least_squares(a, -b.f.dy) : Vector(0);
  out.mu = z.head(d.m1);
  out.lambda = Vector::Zero(d.m2);
  for (std::size_t k = 0; k < active.size(); ++k) out.lambda(active[k]) = z(d.m1 + static_cast<int>(k));
  out.residual = inf_norm(kkt_residual_vector(b, out.mu, out.lambda));
  const bool sign_ok = d.m2 == 0 || out.lambda.minCoeff() >= -config.tol_act;
  out.kkt_point = feasible && sign_ok && out.residual <= config.tol_kkt;
  std::ostringstream msg;
  if (!feasible) msg << "y is infeasible for the inner constraints; ";
  if (!sign_ok) msg << "recovered multiplier is negative (" << format_number(out.lambda.minCoeff()) << "); ";
  if (out.residual > config.tol_kkt) msg << "stationarity residual " << format_number(out.residual) << "; ";
  if (!out.licq) msg << "active gradients are dependent, multipliers not unique; ";
  out.detail = msg.str();
  if (!out.detail.empty()) out.detail.resize(out.detail.size() - 2);
  return out;
}

ConeRep critical_cone_lower(const ProblemSpec& spec, const Vector& x, const Vector& y, const Vector& mu,
                            const Vector& lambda, const ActivePartition& partition, double tol_kkt) {
  const DerivativeBundle b = eval_bundle(spec, x, y);
  const double res = inf_norm(kkt_residual_vector(b, mu, lambda));
  if (res > tol_kkt) throw std::invalid_argument("critical_cone_lower: not a KKT point (residual " + format_number(res) + ")");
  const int m = spec.dims().m;
  const Matrix jh = b.h_jac_y();
  const Matrix jg = b.g_jac_y();
  const Matrix ga = select_rows(jg, partition.alpha);
  ConeRep c;
  c.cone.dim = m;
  c.cone.equalities = Matrix(jh.rows() + ga.rows(), m);
  c.cone.equalities << jh, ga;
  c.cone.inequalities = select_rows(jg, partition.beta);
  c.affine_rows = c.cone.equalities;
  c.literal.dim = m;
  c.literal.equalities = jh;
  const Matrix gi = select_rows(jg, partition.active);
  c.literal.inequalities = Matrix(gi.rows() + 1, m);
  c.literal.inequalities << gi, b.f.dy.transpose();
  return c;
}

std::vector<ConditionResult> LowerConditionsReport::all() const {
  std::vector<ConditionResult> out;
  for (const ConditionResult* c :
       {&kkt, &licq, &strict_complementarity, &sosc, &second_order_necessary, &strong_sosc, &assumption_a}) {
    if (!c->name.empty()) out.push_back(*c);
  }
  return out;
}

LowerConditionsReport check_jacobian_uniqueness(const ProblemSpec& spec, const Vector& x, const Vector& y,
                                                const Vector& mu, const Vector& lambda, const CheckConfig& config) {
  require_smooth(spec);
  const DerivativeBundle b = eval_bundle(spec, x, y);
  const Vector g = b.g_values();
  LowerConditionsReport rep;
  rep.mu = mu;
  rep.lambda = lambda;

  const double res = inf_norm(kkt_residual_vector(b, mu, lambda));
  rep.kkt = make("lower_kkt", CheckRole::Necessary, res, config.tol_kkt);
  std::string partition_error;
  try {
    rep.partition = classify_partition(g, lambda, config.tol_act);
  } catch (const PartitionError& e) {
    partition_error = e.what();
  }
  rep.kkt.status = res <= config.tol_kkt && partition_error.empty() ? Verdict::Satisfied : Verdict::Violated;
  rep.kkt.detail = partition_error.empty() ? "infinity norm of the projected KKT residual" : partition_error;

  std::vector<int> active;
  for (int i = 0; i < g.size(); ++i) {
    if (std::fabs(g(i)) <= config.tol_act) active.push_back(i);
  }
  Matrix rows(b.h_jac_y().rows() + static_cast<int>(active.size()), spec.dims().m);
  rows << b.h_jac_y(), select_rows(b.g_jac_y(), active);
  const double sigma = smallest_row_singular_value(rows);
  rep.licq = make("lower_licq", CheckRole::Hypothesis, sigma, config.tol_licq);
  rep.licq.status = sigma >= config.tol_licq ? Verdict::Satisfied : Verdict::Violated;
  rep.licq.detail = "smallest singular value of the active constraint gradients";
  if (!rep.licq.satisfied()) rep.kkt.role = CheckRole::Hypothesis;
  if (!rep.kkt.satisfied()) return rep;

  double sc = kInf;
  for (int i = 0; i < g.size(); ++i) sc = std::min(sc, lambda(i) - g(i));
  rep.strict_complementarity = make("lower_strict_complementarity", CheckRole::Hypothesis, sc, config.tol_sc);
  rep.strict_complementarity.status = sc >= config.tol_sc ? Verdict::Satisfied : Verdict::Violated;
  rep.strict_complementarity.detail = "min_i lambda_i - g_i";

  const LagrangianEval l = lagrangian(b, mu, lambda);
  const ConeRep cone = critical_cone_lower(spec, x, y, mu, lambda, rep.partition, kInf);
  rep.sosc = make("lower_sosc", CheckRole::Hypothesis, 0.0, config.tol_pd);
  cone_curvature(rep.sosc, l.hess_yy, cone.cone, true, config);

  rep.second_order_necessary =
      make("lower_second_order_necessary", rep.licq.satisfied() ? CheckRole::Necessary : CheckRole::Diagnostic, 0.0,
           config.tol_pd);
  cone_curvature(rep.second_order_necessary, l.hess_yy, cone.cone, false, config);
  return rep;
}

LowerConditionsReport check_assumption_a(const ProblemSpec& spec, const Vector& x, const Vector& y,
                                         const CheckConfig& config) {
  require_smooth(spec);
  const MultiplierRecovery rec = recover_multipliers(spec, x, y, config);
  LowerConditionsReport rep;
  rep.mu = rec.mu;
  rep.lambda = rec.lambda;
  rep.kkt = make("lower_kkt", rec.licq ? CheckRole::Necessary : CheckRole::Hypothesis, rec.residual, config.tol_kkt);
  rep.kkt.status = rec.kkt_point ? Verdict::Satisfied : Verdict::Violated;
  rep.kkt.detail = rec.kkt_point ? "multiplier set is nonempty" : rec.detail;
  rep.licq = make("lower_licq", CheckRole::Hypothesis, rec.sigma_min, config.tol_licq);
  rep.licq.status = rec.licq ? Verdict::Satisfied : Verdict::Violated;
  rep.licq.detail = "smallest singular value of the active constraint gradients";

  rep.assumption_a = make("assumption_a", CheckRole::Hypothesis, 0.0, config.tol_pd);
  if (!rec.kkt_point) {
    rep.assumption_a.status = Verdict::Violated;
    rep.assumption_a.detail = "no multipliers";
    return rep;
  }
  const DerivativeBundle b = eval_bundle(spec, x, y);
  try {
    rep.partition = classify_partition(b.g_values(), rec.lambda, config.tol_act);
  } catch (const PartitionError& e) {
    rep.kkt.status = Verdict::Violated;
    rep.kkt.detail = e.what();
    rep.assumption_a.status = Verdict::Violated;
    rep.assumption_a.detail = "no multipliers";
    return rep;
  }
  const LagrangianEval l = lagrangian(b, rec.mu, rec.lambda);
  const Matrix jh = b.h_jac_y();
  const Matrix ga = select_rows(b.g_jac_y(), rep.partition.alpha);
  Matrix aff(jh.rows() + ga.rows(), spec.dims().m);
  aff << jh, ga;
  const Matrix basis = nullspace_basis(aff, 1e-9);
  const double top = max_eigenvalue_on_subspace(l.hess_yy, basis);
  rep.strong_sosc = make("lower_strong_sosc", CheckRole::Hypothesis, top, config.tol_pd);
  rep.strong_sosc.status = top <= -config.tol_pd ? Verdict::Satisfied : Verdict::Violated;
  rep.strong_sosc.detail = basis.cols() == 0 ? "aff C is {0}" : "max eigenvalue on aff C";
  if (rep.strong_sosc.violated()) rep.strong_sosc.witness = extreme_eigenvector_on_subspace(l.hess_yy, basis, true);

  const bool ok = rep.kkt.satisfied() && rep.licq.satisfied() && rep.strong_sosc.satisfied();
  rep.assumption_a.status = ok ? Verdict::Satisfied : Verdict::Violated;
  rep.assumption_a.margin = top;
  rep.assumption_a.detail = ok ? "multipliers exist, LICQ and strong SOSC hold"
                               : std::string(!rep.licq.satisfied() ? "LICQ fails" : "strong SOSC fails");
  return rep;
}

const char* to_string(SolutionPath p) { return p == SolutionPath::Smooth ? "smooth" : "nonsmooth"; }

namespace {

struct SolverSetup {
  Vector y, mu, lambda;
};

SolverSetup setup(const ProblemSpec& spec, const KktSeed& seed) {
  const Dimensions& d = spec.dims();
  SolverSetup s;
  if (seed.y.size() != d.m) throw std::invalid_argument("solve_lower: seed y has wrong length");
  s.y = seed.y;
  s.mu = seed.mu.size() == 0 ? Vector::Zero(d.m1) : seed.mu;
  s.lambda = seed.lambda.size() == 0 ? Vector::Zero(d.m2) : seed.lambda;
  if (s.mu.size() != d.m1 || s.lambda.size() != d.m2) throw std::invalid_argument("solve_lower: seed multiplier length");
  return s;
}

DerivativeBundle bundle_or_throw(const ProblemSpec& spec, const Vector& x, const Vector& y,
                                 const std::vector<double>& trace) {
  try {
    return eval_bundle(spec, x, y);
  } catch (const DomainError& e) {
    throw NewtonError(std::string("evaluation failed during Newton: ") + e.what(), trace);
  }
}

// Shared driver: system(z) returns (F, J); stops at tol, then polishes up to
// two steps while the residual keeps halving. Returns the best iterate.
template <class System>
Vector newton(System&& system, Vector z, const CheckConfig& config, std::vector<double>& trace, int& iterations,
              double& residual) {
  Vector best = z;
  double best_r = kInf;
  int polish = 0;
  double r0 = -1.0;
  for (int k = 0;; ++k) {
    auto [f, jac] = system(z);
    const double r = inf_norm(f);
    trace.push_back(r);
    if (!std::isfinite(r)) throw NewtonError("Newton residual is not finite", trace);
    if (r0 < 0) r0 = r;
    if (r > 1e12 * (1.0 + r0)) throw NewtonError("Newton iteration diverged", trace);
    if (r < best_r) {
      best_r = r;
      best = z;
    }
    if (best_r <= config.tol_newton) {
      const bool stalled = polish > 0 && r >= 0.5 * trace[trace.size() - 2];
      if (r == 0.0 || polish >= 2 || stalled) break;
      ++polish;
    }
    if (k >= config.max_iter) throw NewtonError("Newton did not converge within max_iter", trace);
    LuDecomposition lu(jac);
    if (!lu.nonsingular()) {
      if (best_r <= config.tol_newton) break;
      const PivotReport& p = lu.report();
      throw NewtonError("singular Newton matrix (pivot " + format_number(p.min_pivot) + " at step " +
                            std::to_string(p.min_index) + ")",
                        trace);
    }
    z -= lu.solve(f);
    ++iterations;
  }
  residual = best_r;
  return best;
}

}  // namespace

KktSolution solve_lower_smooth(const ProblemSpec& spec, const Vector& x, const KktSeed& seed,
                               const CheckConfig& config) {
  const Dimensions& d = spec.dims();
  const SolverSetup s = setup(spec, seed);
  const int m = d.m, m1 = d.m1, m2 = d.m2;
  const int oy = 0, ow = m, omu = m + m2, ol = m + m2 + m1;
  const int size = m + m2 + m1 + m2;
  KktSolution sol;
  sol.solver = "squared-slack";

  Vector z(size);
  z.segment(oy, m) = s.y;
  const Vector g0 = bundle_or_throw(spec, x, s.y, sol.trace).g_values();
  for (int i = 0; i < m2; ++i) z(ow + i) = std::sqrt(std::max(config.slack_floor, -g0(i)));
  z.segment(omu, m1) = s.mu;
  z.segment(ol, m2) = s.lambda;

  auto system = [&](const Vector& v) {
    const Vector y = v.segment(oy, m), w = v.segment(ow, m2), mu = v.segment(omu, m1), lam = v.segment(ol, m2);
    const DerivativeBundle b = bundle_or_throw(spec, x, y, sol.trace);
    const LagrangianEval l = lagrangian(b, mu, lam);
    const Matrix jh = b.h_jac_y(), jg = b.g_jac_y();
    Vector f(size);
    f << l.grad_y, -2.0 * lam.cwiseProduct(w), b.h_values(), b.g_values() + w.cwiseProduct(w);
    Matrix j = Matrix::Zero(size, size);
    j.block(oy, oy, m, m) = l.hess_yy;
    j.block(oy, omu, m, m1) = jh.transpose();
    j.block(oy, ol, m, m2) = -jg.transpose();
    j.block(ow, ow, m2, m2) = (-2.0 * lam).asDiagonal();
    j.block(ow, ol, m2, m2) = (-2.0 * w).asDiagonal();
    j.block(omu, oy, m1, m) = jh;
    j.block(ol, oy, m2, m) = jg;
    j.block(ol, ow, m2, m2) = (2.0 * w).asDiagonal();
    return std::make_pair(f, j);
  };
  const Vector out = newton(system, z, config, sol.trace, sol.iterations, sol.residual);
  sol.x = x;
  sol.y = out.segment(oy, m);
  sol.w = out.segment(ow, m2).cwiseAbs();
  sol.mu = out.segment(omu, m1);
  sol.lambda = out.segment(ol, m2);
  if (m2 > 0 && sol.lambda.minCoeff() < -config.tol_act) {
    throw NewtonError("squared-slack Newton ended with a negative multiplier", sol.trace);
  }
  double sc = kInf;
  for (int i = 0; i < m2; ++i) sc = std::min(sc, sol.lambda(i) + sol.w(i) * sol.w(i));
  sol.path = sc >= config.tol_sc ? SolutionPath::Smooth : SolutionPath::Nonsmooth;
  return sol;
}

KktSolution solve_lower_semismooth(const ProblemSpec& spec, const Vector& x, const KktSeed& seed,
                                   const CheckConfig& config) {
  const Dimensions& d = spec.dims();
  const SolverSetup s = setup(spec, seed);
  const int m = d.m, m1 = d.m1, m2 = d.m2;
  const int size = m + m1 + m2;
  KktSolution sol;
  sol.solver = "semismooth";
  Vector z(size);
  z << s.y, s.mu, s.lambda;

  auto system = [&](const Vector& v) {
    const Vector y = v.head(m), mu = v.segment(m, m1), lam = v.tail(m2);
    const DerivativeBundle b = bundle_or_throw(spec, x, y, sol.trace);
    const LagrangianEval l = lagrangian(b, mu, lam);
    const Vector g = b.g_values();
    const Matrix jh = b.h_jac_y(), jg = b.g_jac_y();
    Vector f(size);
    f << l.grad_y, b.h_values(), g - (lam + g).cwiseMin(0.0);
    Vector wdiag(m2);
    for (int i = 0; i < m2; ++i) wdiag(i) = lam(i) + g(i) < 0.0 ? 1.0 : 0.0;
    Matrix j = Matrix::Zero(size, size);
    j.block(0, 0, m, m) = l.hess_yy;
    j.block(0, m, m, m1) = jh.transpose();
    j.block(0, m + m1, m, m2) = -jg.transpose();
    j.block(m, 0, m1, m) = jh;
    j.block(m + m1, 0, m2, m) = (Vector::Ones(m2) - wdiag).asDiagonal() * jg;
    j.block(m + m1, m + m1, m2, m2) = (-wdiag).asDiagonal();
    return std::make_pair(f, j);
  };
  const Vector out = newton(system, z, config, sol.trace, sol.iterations, sol.residual);
  sol.x = x;
  sol.y = out.head(m);
  sol.mu = out.segment(m, m1);
  sol.lambda = out.tail(m2);
  const Vector g = eval_bundle(spec, x, sol.y).g_values();
  sol.w = (-g).cwiseMax(0.0).cwiseSqrt();
  double sc = kInf;
  for (int i = 0; i < m2; ++i) sc = std::min(sc, sol.lambda(i) - g(i));
  sol.path = sc >= config.tol_sc ? SolutionPath::Smooth : SolutionPath::Nonsmooth;
  return sol;
}

KktSolution solve_lower(const ProblemSpec& spec, const Vector& x, const KktSeed& seed, const CheckConfig& config) {
  require_smooth(spec);
  std::string first;
  try {
    return solve_lower_smooth(spec, x, seed, config);
  } catch (const NewtonError& e) {
    first = e.what();
  }
  try {
    return solve_lower_semismooth(spec, x, seed, config);
  } catch (const NewtonError& e) {
    throw NewtonError("lower-level Newton failed: " + first + "; semismooth: " + e.what(), e.trace());
  }
}

}  // namespace mmx
