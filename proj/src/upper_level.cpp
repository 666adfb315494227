#include "minimax/upper_level.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "minimax/lp.hpp"

namespace mmx {

namespace {

Matrix select_rows(const Matrix& m, const std::vector<int>& idx) {
  Matrix out(static_cast<int>(idx.size()), m.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<int>(k)) = m.row(idx[k]);
  return out;
}

ConditionResult make(const std::string& name, CheckRole role, double margin, double tol) {
  ConditionResult c;
  c.name = name;
  c.role = role;
  c.margin = margin;
  c.tolerance = tol;
  return c;
}

// min ||JH^T u + JG_I^T v + r0||_1 over u free, v >= 0. Returns (residual, (u, v_I)).
std::pair<double, Vector> fit_multipliers(const Matrix& jh, const Matrix& jg_active, const Vector& r0) {
  const int n = static_cast<int>(r0.size());
  const int n1 = static_cast<int>(jh.rows());
  const int k = static_cast<int>(jg_active.rows());
  const int vars = n1 + k + 2 * n;
  LpProblem lp = LpProblem::with_variables(vars);
  lp.lower.segment(n1, k + 2 * n).setZero();
  lp.objective.tail(2 * n).setConstant(-1.0);
  for (int r = 0; r < n; ++r) {
    Vector row = Vector::Zero(vars);
    row.head(n1) = jh.col(r);
    row.segment(n1, k) = jg_active.col(r);
    row(n1 + k + r) = 1.0;
    row(n1 + k + n + r) = -1.0;
    lp.add_equality(row, -r0(r));
  }
  const LpResult res = solve_lp(lp);
  if (res.status != LpStatus::Optimal) return {kInf, Vector()};
  return {-res.value, res.z.head(n1 + k)};
}

// min r.d over {JH d = 0, grad G_I d <= 0, |d| <= 1}.
std::pair<double, Vector> steepest_descent(const Matrix& jh, const Matrix& jg_active, const Vector& r) {
  const int n = static_cast<int>(r.size());
  LpProblem lp = LpProblem::with_variables(n);
  lp.objective = -r;
  lp.lower.setConstant(-1.0);
  lp.upper.setConstant(1.0);
  for (int i = 0; i < jh.rows(); ++i) lp.add_equality(jh.row(i).transpose(), 0.0);
  for (int i = 0; i < jg_active.rows(); ++i) lp.add_inequality(jg_active.row(i).transpose(), 0.0);
  const LpResult res = solve_lp(lp);
  if (res.status != LpStatus::Optimal) return {0.0, Vector::Zero(n)};
  return {-res.value, res.z};
}

}  // namespace

UpperActiveSet upper_active_set(const ProblemSpec& spec, const Vector& x, double tol_act) {
  const DerivativeBundle b = eval_upper_bundle(spec, x);
  UpperActiveSet s;
  s.n1 = spec.dims().n1;
  const Vector hv = b.H_values();
  const Vector gv = b.G_values();
  for (int j = 0; j < hv.size(); ++j) {
    if (std::fabs(hv(j)) > tol_act) {
      throw InfeasiblePointError("x violates H" + std::to_string(j + 1) + " = 0 (value " + format_number(hv(j)) + ")");
    }
  }
  for (int i = 0; i < gv.size(); ++i) {
    if (gv(i) > tol_act) {
      throw InfeasiblePointError("x violates G" + std::to_string(i + 1) + " <= 0 (value " + format_number(gv(i)) + ")");
    }
    if (gv(i) >= -tol_act) s.active.push_back(i);
  }
  return s;
}

MfcqResult check_mfcq(const ProblemSpec& spec, const Vector& x, const CheckConfig& config) {
  const int n = spec.dims().n;
  MfcqResult out;
  out.active = upper_active_set(spec, x, config.tol_act);
  const DerivativeBundle b = eval_upper_bundle(spec, x);
  const Matrix jh = b.H_jac();
  const Matrix jg = select_rows(b.G_jac(), out.active.active);
  out.sigma_min = smallest_row_singular_value(jh);

  // maximize t over (d, t): JH d = 0, grad G_i d + t <= 0, |d| <= 1, t <= 1.
  LpProblem lp = LpProblem::with_variables(n + 1);
  lp.objective(n) = 1.0;
  lp.lower.head(n).setConstant(-1.0);
  lp.upper.head(n).setConstant(1.0);
  lp.upper(n) = 1.0;
  for (int i = 0; i < jh.rows(); ++i) {
    Vector row = Vector::Zero(n + 1);
    row.head(n) = jh.row(i).transpose();
    lp.add_equality(row, 0.0);
  }
  for (int i = 0; i < jg.rows(); ++i) {
    Vector row = Vector::Zero(n + 1);
    row.head(n) = jg.row(i).transpose();
    row(n) = 1.0;
    lp.add_inequality(row, 0.0);
  }
  const LpResult res = solve_lp(lp);
  out.t_star = res.status == LpStatus::Optimal ? res.value : -kInf;
  out.witness = res.status == LpStatus::Optimal ? Vector(res.z.head(n)) : Vector::Zero(n);

  const bool rank_ok = out.sigma_min >= config.tol_licq;
  const bool t_ok = out.t_star > config.tol_mfcq;
  out.result = make("upper_mfcq", CheckRole::Hypothesis, out.t_star, config.tol_mfcq);
  out.result.status = rank_ok && t_ok ? Verdict::Satisfied : Verdict::Violated;
  std::ostringstream msg;
  msg << "|I| = " << out.active.active.size() << ", LP optimum t* = " << format_number(out.t_star);
  if (jh.rows() > 0) msg << ", smallest singular value of JH = " << format_number(out.sigma_min);
  if (!rank_ok) msg << "; equality gradients are dependent";
  out.result.detail = msg.str();
  if (out.result.satisfied()) out.result.witness = out.witness;
  return out;
}

LambdaPolytope upper_kkt_and_polytope(const ProblemSpec& spec, const Vector& x, const Vector& working_grad,
                                      const CheckConfig& config) {
  const Dimensions& d = spec.dims();
  if (working_grad.size() != d.n) throw std::invalid_argument("upper_kkt_and_polytope: gradient length mismatch");
  LambdaPolytope p;
  p.r0 = working_grad;
  p.active = upper_active_set(spec, x, config.tol_act);
  p.n2 = d.n2;
  const DerivativeBundle b = eval_upper_bundle(spec, x);
  p.JH = b.H_jac();
  p.JG = b.G_jac();
  const std::vector<int>& act = p.active.active;
  const int k = static_cast<int>(act.size());
  const Matrix jga = select_rows(p.JG, act);

  auto [res, z] = fit_multipliers(p.JH, jga, p.r0);
  p.fit_residual = res;
  p.nonempty = res <= config.tol_kkt;
  p.point = Vector::Zero(d.n1 + d.n2);
  if (z.size() > 0 || d.n1 + k == 0) {
    p.point.head(d.n1) = z.head(d.n1);
    for (int i = 0; i < k; ++i) p.point(d.n1 + act[static_cast<std::size_t>(i)]) = z(d.n1 + i);
  }
  p.consistent_rhs = p.JH.transpose() * p.point.head(d.n1) + p.JG.transpose() * p.point.tail(d.n2);
  if (!p.nonempty) {
    auto [value, dir] = steepest_descent(p.JH, jga, p.r0);
    p.descent_value = value;
    p.descent_direction = dir;
    return p;
  }

  // Recession cone {JH^T u + JG_I^T v = 0, v >= 0} is {0} iff bounded.
  bool bounded = smallest_row_singular_value(p.JH) >= config.tol_licq;
  if (bounded && k > 0) {
    LpProblem lp = LpProblem::with_variables(d.n1 + k);
    lp.lower.head(d.n1).setConstant(-1.0);
    lp.upper.head(d.n1).setConstant(1.0);
    lp.lower.tail(k).setZero();
    lp.upper.tail(k).setConstant(1.0);
    lp.objective.tail(k).setOnes();
    for (int r = 0; r < d.n; ++r) {
      Vector row(d.n1 + k);
      row << p.JH.col(r), jga.col(r);
      lp.add_equality(row, 0.0);
    }
    const LpResult rec = solve_lp(lp);
    bounded = rec.status == LpStatus::Optimal && rec.value <= config.tol_lp;
  }
  p.bounded = bounded;

  if (d.n1 + k > config.vertex_cap) return p;
  p.enumerated = true;
  const double scale = 1.0 + inf_norm(p.consistent_rhs);
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    std::vector<int> support;
    for (int i = 0; i < k; ++i) {
      if (mask & (1u << i)) support.push_back(i);
    }
    const int cols = d.n1 + static_cast<int>(support.size());
    Matrix a(d.n, cols);
    a.leftCols(d.n1) = p.JH.transpose();
    for (std::size_t s = 0; s < support.size(); ++s) a.col(d.n1 + static_cast<int>(s)) = jga.row(support[s]).transpose();
    if (cols > 0 && smallest_row_singular_value(Matrix(a.transpose())) < 1e-10) continue;
    const Vector sol = cols > 0 ? least_squares(a, p.consistent_rhs) : Vector(0);
    const Vector resid = (cols > 0 ? Vector(a * sol) : Vector(Vector::Zero(d.n))) - p.consistent_rhs;
    if (inf_norm(resid) > 1e-9 * scale) continue;
    Vector vertex = Vector::Zero(d.n1 + d.n2);
    vertex.head(d.n1) = sol.head(d.n1);
    bool ok = true;
    for (std::size_t s = 0; s < support.size(); ++s) {
      double v = sol(d.n1 + static_cast<int>(s));
      if (v < -config.tol_lp) ok = false;
      vertex(d.n1 + act[static_cast<std::size_t>(support[s])]) = std::max(v, 0.0);
    }
    if (!ok) continue;
    bool dup = false;
    for (const Vector& e : p.vertices) dup = dup || inf_norm(e - vertex) <= 1e-9 * scale;
    if (!dup) p.vertices.push_back(vertex);
  }
  return p;
}

UpperConeRep critical_cone_upper(const ProblemSpec& spec, const Vector& x, const Vector& working_grad,
                                 const LambdaPolytope& poly, const CheckConfig& config) {
  const Dimensions& d = spec.dims();
  const UpperActiveSet act = upper_active_set(spec, x, config.tol_act);
  const DerivativeBundle b = eval_upper_bundle(spec, x);
  const Matrix jh = b.H_jac();
  const Matrix jga = select_rows(b.G_jac(), act.active);
  UpperConeRep c;
  c.literal.dim = d.n;
  c.literal.equalities = jh;
  c.literal.inequalities = Matrix(jga.rows() + 1, d.n);
  c.literal.inequalities << jga, working_grad.transpose();
  if (!poly.nonempty) {
    c.reduced = c.literal;
    return c;
  }
  std::vector<int> eq, ineq;
  const int k = static_cast<int>(act.active.size());
  for (int i = 0; i < k; ++i) {
    // max v_i over Lambda (with the consistent right-hand side), capped at 1.
    LpProblem lp = LpProblem::with_variables(d.n1 + k);
    lp.lower.tail(k).setZero();
    lp.upper(d.n1 + i) = 1.0;
    lp.objective(d.n1 + i) = 1.0;
    for (int r = 0; r < d.n; ++r) {
      Vector row(d.n1 + k);
      row << jh.col(r), jga.col(r);
      lp.add_equality(row, poly.consistent_rhs(r));
    }
    const LpResult res = solve_lp(lp);
    if (res.status == LpStatus::Optimal && res.value > config.tol_act) {
      eq.push_back(i);
      c.equality_rows.push_back(act.active[static_cast<std::size_t>(i)]);
    } else {
      ineq.push_back(i);
    }
  }
  c.reduced.dim = d.n;
  c.reduced.equalities = Matrix(jh.rows() + static_cast<int>(eq.size()), d.n);
  c.reduced.equalities << jh, select_rows(jga, eq);
  c.reduced.inequalities = select_rows(jga, ineq);
  return c;
}

double upper_curvature(const ProblemSpec& spec, const Vector& x, const Matrix& hess_phi, const LambdaPolytope& poly,
                       const Vector& d) {
  const Dimensions& dims = spec.dims();
  const DerivativeBundle b = eval_upper_bundle(spec, x);
  Vector c(dims.n1 + dims.n2);
  for (int j = 0; j < dims.n1; ++j) c(j) = d.dot(b.H[static_cast<std::size_t>(j)].dxx * d);
  for (int i = 0; i < dims.n2; ++i) c(dims.n1 + i) = d.dot(b.G[static_cast<std::size_t>(i)].dxx * d);
  const double base = d.dot(hess_phi * d);
  if (dims.n1 + dims.n2 == 0) return base;
  if (poly.enumerated && poly.bounded && !poly.vertices.empty()) {
    double best = -kInf;
    for (const Vector& v : poly.vertices) best = std::max(best, c.dot(v));
    return base + best;
  }
  const std::vector<int>& act = poly.active.active;
  const int k = static_cast<int>(act.size());
  LpProblem lp = LpProblem::with_variables(dims.n1 + k);
  lp.lower.tail(k).setZero();
  lp.objective.head(dims.n1) = c.head(dims.n1);
  for (int i = 0; i < k; ++i) lp.objective(dims.n1 + i) = c(dims.n1 + act[static_cast<std::size_t>(i)]);
  for (int r = 0; r < dims.n; ++r) {
    Vector row(dims.n1 + k);
    row.head(dims.n1) = poly.JH.col(r);
    for (int i = 0; i < k; ++i) row(dims.n1 + i) = poly.JG(act[static_cast<std::size_t>(i)], r);
    lp.add_equality(row, poly.consistent_rhs(r));
  }
  const LpResult res = solve_lp(lp);
  if (res.status == LpStatus::Unbounded) return kInf;
  if (res.status != LpStatus::Optimal) return -kInf;
  return base + res.value;
}

namespace {

struct Sampled {
  std::vector<DirectionEvidence> evidence;
  DirectionEvidence best;
};

// Minimize q over sampled unit directions of the cone, then refine the best
// one by pattern search inside the face that contains it.
Sampled sample_minimum(const ProblemSpec& spec, const Vector& x, const Matrix& hess_phi, const LambdaPolytope& poly,
                       const ConeStructure& s, const CheckConfig& config) {
  ConeSampleOptions opt;
  opt.random_count = config.cone_samples;
  opt.face_cap = config.face_cap;
  opt.seed = config.seed;
  Sampled out;
  out.best.q = kInf;
  for (const Vector& d : sample_cone(s, opt)) {
    const double q = upper_curvature(spec, x, hess_phi, poly, d);
    out.evidence.push_back({d, q});
    if (q < out.best.q) out.best = {d, q};
  }
  if (out.best.d.size() == 0) return out;
  std::vector<int> face;
  for (int j = 0; j < s.strict.rows(); ++j) {
    if (std::fabs(s.strict.row(j).dot(out.best.d)) <= 1e-9) face.push_back(j);
  }
  const Matrix basis = face_basis(s, face, 1e-9);
  double step = 0.25;
  for (int it = 0; it < config.refine_steps && basis.cols() > 0; ++it) {
    bool improved = false;
    for (int k = 0; k < basis.cols() && !improved; ++k) {
      for (double sign : {1.0, -1.0}) {
        Vector d = out.best.d + sign * step * basis.col(k);
        if (d.norm() <= 1e-12) continue;
        d.normalize();
        if (s.strict.rows() > 0 && (s.strict * d).maxCoeff() > 1e-12) continue;
        const double q = upper_curvature(spec, x, hess_phi, poly, d);
        if (q < out.best.q) {
          out.best = {d, q};
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return out;
}

Matrix reduced_matrix(const ProblemSpec& spec, const Vector& x, const Matrix& hess_phi, const Vector& vertex) {
  const Dimensions& dims = spec.dims();
  const DerivativeBundle b = eval_upper_bundle(spec, x);
  Matrix m = hess_phi;
  for (int j = 0; j < dims.n1; ++j) m += vertex(j) * b.H[static_cast<std::size_t>(j)].dxx;
  for (int i = 0; i < dims.n2; ++i) m += vertex(dims.n1 + i) * b.G[static_cast<std::size_t>(i)].dxx;
  return symmetrize(m);
}

enum class Mode { Necessary, Sufficient };

SecondOrderResult second_order(const ProblemSpec& spec, const Vector& x, const Matrix& hess_phi,
                               const LambdaPolytope& poly, const UpperConeRep& cone, const CheckConfig& config,
                               Mode mode) {
  SecondOrderResult out;
  const bool nec = mode == Mode::Necessary;
  out.result = make(nec ? "upper_second_order_necessary" : "upper_second_order_sufficient",
                    nec ? CheckRole::Necessary : CheckRole::Sufficient, 0.0, config.tol_pd);
  if (!poly.nonempty) {
    out.result.status = nec ? Verdict::Inconclusive : Verdict::Violated;
    out.result.detail = "multiplier set Lambda is empty";
    return out;
  }
  const ConeStructure s = analyze_cone(cone.reduced, 1e-9);
  if (s.trivial()) {
    out.vacuous = true;
    out.result.status = Verdict::Satisfied;
    out.result.margin = kInf;
    out.gamma2 = kInf;
    out.result.detail = "critical cone is {0}; condition holds vacuously";
    return out;
  }
  if (s.subspace() && poly.singleton()) {
    out.exact = true;
    const Matrix m = reduced_matrix(spec, x, hess_phi, poly.vertices.front());
    const double lo = min_eigenvalue_on_subspace(m, s.lineality);
    out.result.margin = lo;
    out.gamma2 = lo;
    const double threshold = nec ? -config.tol_pd : config.tol_pd;
    out.result.status = lo >= threshold ? Verdict::Satisfied : Verdict::Violated;
    if (out.result.violated()) out.result.witness = extreme_eigenvector_on_subspace(m, s.lineality, false);
    out.result.detail = "exact: min eigenvalue of the reduced matrix on the critical subspace";
    return out;
  }
  const Sampled sm = sample_minimum(spec, x, hess_phi, poly, s, config);
  out.evidence = sm.evidence;
  out.samples = static_cast<int>(sm.evidence.size());
  out.result.margin = sm.best.q;
  out.gamma2 = sm.best.q;
  std::ostringstream msg;
  msg << "sampled: " << out.samples << " cone directions, refined minimum " << format_number(sm.best.q);
  out.result.detail = msg.str();
  if (sm.best.d.size() == 0) {
    out.result.status = Verdict::Inconclusive;
    return out;
  }
  if (sm.best.q < -config.tol_pd) {
    out.result.status = Verdict::Violated;
    out.result.witness = sm.best.d;
  } else if (nec || sm.best.q >= config.tol_pd) {
    out.result.status = Verdict::Satisfied;
  } else {
    out.result.status = Verdict::Inconclusive;
  }
  return out;
}

}  // namespace

SecondOrderResult second_order_necessary(const ProblemSpec& spec, const Vector& x, const Matrix& hess_phi,
                                         const LambdaPolytope& poly, const UpperConeRep& cone,
                                         const CheckConfig& config) {
  return second_order(spec, x, hess_phi, poly, cone, config, Mode::Necessary);
}

SecondOrderResult second_order_sufficient(const ProblemSpec& spec, const Vector& x, const Matrix& hess_phi,
                                          const LambdaPolytope& poly, const UpperConeRep& cone,
                                          const CheckConfig& config) {
  return second_order(spec, x, hess_phi, poly, cone, config, Mode::Sufficient);
}

NonsmoothFirstOrder first_order_nonsmooth_necessary(const ProblemSpec& spec, const Vector& x,
                                                    const KktSolution& sol, const CheckConfig& config) {
  const Dimensions& d = spec.dims();
  NonsmoothFirstOrder out;
  out.result = make("upper_first_order_nonsmooth", CheckRole::Necessary, kInf, config.tol_kkt);
  const UpperActiveSet act = upper_active_set(spec, x, config.tol_act);
  const DerivativeBundle b = eval_upper_bundle(spec, x);
  const Matrix jh = b.H_jac();
  const Matrix jga = select_rows(b.G_jac(), act.active);
  const ActivePartition part = solution_partition(spec, sol, config.tol_act);

  std::vector<WSelector> family = enumerate_b_selectors(part, config.beta_cap);
  out.exhaustive = part.beta.empty();
  for (auto& w : clarke_selectors(part, config.beta_resolution, config.beta_cap)) {
    if (!w.binary()) family.push_back(std::move(w));
  }
  Vector first_gradient;
  for (const WSelector& w : family) {
    ++out.tried;
    if (!pivot_report(assemble_A(spec, sol, w)).nonsingular) {
      ++out.singular;
      continue;
    }
    Vector r;
    try {
      r = phi_candidate_gradient(spec, sol, w);
    } catch (const SingularMatrixError&) {
      ++out.singular;
      continue;
    }
    if (first_gradient.size() == 0) first_gradient = r;
    auto [res, z] = fit_multipliers(jh, jga, r);
    out.result.margin = std::min(out.result.margin, res);
    if (res <= config.tol_kkt) {
      out.selector = w;
      out.candidate_gradient = r;
      out.u = z.head(d.n1);
      out.v = Vector::Zero(d.n2);
      for (std::size_t i = 0; i < act.active.size(); ++i) out.v(act.active[i]) = z(d.n1 + static_cast<int>(i));
      out.result.status = Verdict::Satisfied;
      out.result.detail = "W = " + w.label() + " admits upper multipliers";
      return out;
    }
  }
  std::ostringstream msg;
  if (out.singular == out.tried) {
    out.result.status = Verdict::Inconclusive;
    msg << "every A(x,W) in the search was singular (" << out.tried << " selectors)";
  } else if (out.exhaustive) {
    out.result.status = Verdict::Violated;
    out.candidate_gradient = first_gradient;
    auto [value, dir] = steepest_descent(jh, jga, first_gradient);
    out.result.witness = dir;
    msg << "no multipliers for the unique selector; descent value " << format_number(value);
  } else {
    out.result.status = Verdict::Inconclusive;
    msg << "not found (sampled) over " << out.tried << " selectors";
  }
  out.result.detail = msg.str();
  return out;
}

}  // namespace mmx
