#include "minimax/generalized_jacobian.hpp"

#include <cmath>
#include <sstream>

namespace mmx {

Vector project_nonpositive(const Vector& v) { return v.cwiseMin(0.0); }

bool WSelector::binary() const {
  for (int i = 0; i < diag.size(); ++i) {
    if (diag(i) != 0.0 && diag(i) != 1.0) return false;
  }
  return true;
}

std::string WSelector::label() const {
  std::ostringstream s;
  s << '(';
  for (int i = 0; i < diag.size(); ++i) s << (i ? "," : "") << format_number(diag(i));
  s << ')';
  return s.str();
}

namespace {

WSelector base_selector(const ActivePartition& p) {
  WSelector w;
  w.diag = Vector::Zero(p.size);
  w.source.assign(static_cast<std::size_t>(p.size), SelectorSource::ForcedZero);
  for (int i : p.gamma) {
    w.diag(i) = 1.0;
    w.source[static_cast<std::size_t>(i)] = SelectorSource::ForcedOne;
  }
  for (int i : p.beta) w.source[static_cast<std::size_t>(i)] = SelectorSource::Free;
  return w;
}

void check_cap(const ActivePartition& p, int cap) {
  if (static_cast<int>(p.beta.size()) > cap) {
    throw SelectorCapExceeded("|beta| = " + std::to_string(p.beta.size()) + " exceeds the selector cap " +
                              std::to_string(cap));
  }
}

}  // namespace

std::vector<WSelector> enumerate_b_selectors(const ActivePartition& partition, int cap) {
  check_cap(partition, cap);
  const WSelector base = base_selector(partition);
  const std::size_t k = partition.beta.size();
  std::vector<WSelector> out;
  out.reserve(std::size_t{1} << k);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    WSelector w = base;
    for (std::size_t b = 0; b < k; ++b) w.diag(partition.beta[b]) = (mask >> b) & 1u ? 1.0 : 0.0;
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<WSelector> clarke_selectors(const ActivePartition& partition, int resolution, int cap) {
  check_cap(partition, cap);
  if (resolution < 2) throw std::invalid_argument("clarke_selectors: resolution must be >= 2");
  const WSelector base = base_selector(partition);
  const std::size_t k = partition.beta.size();
  std::vector<double> grid(static_cast<std::size_t>(resolution));
  for (int i = 0; i < resolution; ++i) grid[static_cast<std::size_t>(i)] = static_cast<double>(i) / (resolution - 1);
  std::vector<WSelector> out;
  double total = std::pow(static_cast<double>(resolution), static_cast<double>(k));
  if (total <= 4096.0) {
    std::vector<int> idx(k, 0);
    for (;;) {
      WSelector w = base;
      for (std::size_t b = 0; b < k; ++b) w.diag(partition.beta[b]) = grid[static_cast<std::size_t>(idx[b])];
      out.push_back(std::move(w));
      std::size_t b = 0;
      while (b < k && ++idx[b] == resolution) idx[b++] = 0;
      if (b == k) break;
    }
    return out;
  }
  for (std::size_t b = 0; b < k; ++b) {
    for (double t : grid) {
      WSelector w = base;
      for (std::size_t c = 0; c < k; ++c) w.diag(partition.beta[c]) = 0.5;
      w.diag(partition.beta[b]) = t;
      out.push_back(std::move(w));
    }
  }
  return out;
}

Matrix assemble_A(const ProblemSpec& spec, const KktSolution& sol, const WSelector& w) {
  const Dimensions& d = spec.dims();
  if (w.diag.size() != d.m2) throw std::invalid_argument("assemble_A: selector length mismatch");
  const DerivativeBundle b = eval_bundle(spec, sol.x, sol.y);
  const LagrangianEval l = lagrangian(b, sol.mu, sol.lambda);
  const Matrix jh = b.h_jac_y(), jg = b.g_jac_y();
  const int size = d.m + d.m1 + d.m2;
  Matrix a = Matrix::Zero(size, size);
  a.block(0, 0, d.m, d.m) = l.hess_yy;
  a.block(0, d.m, d.m, d.m1) = jh.transpose();
  a.block(0, d.m + d.m1, d.m, d.m2) = -jg.transpose();
  a.block(d.m, 0, d.m1, d.m) = jh;
  a.block(d.m + d.m1, 0, d.m2, d.m) = (Vector::Ones(d.m2) - w.diag).asDiagonal() * jg;
  a.block(d.m + d.m1, d.m + d.m1, d.m2, d.m2) = (-w.diag).asDiagonal();
  return a;
}

Matrix assemble_A_rhs(const ProblemSpec& spec, const KktSolution& sol, const WSelector& w) {
  const Dimensions& d = spec.dims();
  const DerivativeBundle b = eval_bundle(spec, sol.x, sol.y);
  const LagrangianEval l = lagrangian(b, sol.mu, sol.lambda);
  Matrix rhs(d.m + d.m1 + d.m2, d.n);
  rhs << l.hess_yx, b.h_jac_x(), (Vector::Ones(d.m2) - w.diag).asDiagonal() * b.g_jac_x();
  return rhs;
}

Matrix assemble_H(const ProblemSpec& spec, const KktSolution& sol, const WSelector& w) {
  const Matrix a = assemble_A(spec, sol, w);
  const Matrix rhs = assemble_A_rhs(spec, sol, w);
  if (a.rows() == 0) return Matrix(0, spec.dims().n);
  return solve_linear(a, rhs);
}

Vector phi_candidate_gradient(const ProblemSpec& spec, const KktSolution& sol, const WSelector& w) {
  const DerivativeBundle b = eval_bundle(spec, sol.x, sol.y);
  const LagrangianEval l = lagrangian(b, sol.mu, sol.lambda);
  const Matrix h = assemble_H(spec, sol, w);
  Vector dl(l.grad_y.size() + spec.dims().m1 + spec.dims().m2);
  dl << l.grad_y, b.h_values(), -b.g_values();
  return l.grad_x - h.transpose() * dl;
}

const char* to_string(DerivativeKind k) {
  switch (k) {
    case DerivativeKind::Directional:
      return "directional";
    case DerivativeKind::BSubdifferential:
      return "b_subdifferential";
    case DerivativeKind::ClarkeSample:
      return "clarke_sample";
    case DerivativeKind::OuterApprox:
      return "outer_approx";
  }
  return "?";
}

int GeneralizedDerivativeSet::nonsingular_count() const {
  int n = 0;
  for (const auto& m : members) n += m.singular ? 0 : 1;
  return n;
}

ActivePartition solution_partition(const ProblemSpec& spec, const KktSolution& sol, double tol_act) {
  const Vector g = eval_bundle(spec, sol.x, sol.y).g_values();
  return classify_partition(g, sol.lambda, tol_act);
}

namespace {

template <class Fn>
GeneralizedDerivativeSet collect(const ProblemSpec& spec, const KktSolution& sol,
                                 const std::vector<WSelector>& family, DerivativeKind kind, Fn&& value) {
  GeneralizedDerivativeSet out;
  out.kind = kind;
  for (const WSelector& w : family) {
    GeneralizedDerivative g;
    g.selector = w;
    const Matrix a = assemble_A(spec, sol, w);
    g.pivots = pivot_report(a);
    g.singular = !g.pivots.nonsingular;
    if (!g.singular) {
      try {
        g.value = value(w);
      } catch (const SingularMatrixError&) {
        g.singular = true;
      }
    }
    out.members.push_back(std::move(g));
  }
  return out;
}

}  // namespace

GeneralizedDerivativeSet kkt_map_directional(const ProblemSpec& spec, const KktSolution& sol, const Vector& dx,
                                             const CheckConfig& config) {
  if (dx.size() != spec.dims().n) throw std::invalid_argument("kkt_map_directional: direction length mismatch");
  const ActivePartition p = solution_partition(spec, sol, config.tol_act);
  return collect(spec, sol, enumerate_b_selectors(p, config.beta_cap), DerivativeKind::Directional,
                 [&](const WSelector& w) { return Matrix(-(assemble_H(spec, sol, w) * dx)); });
}

GeneralizedDerivativeSet phi_generalized_gradients(const ProblemSpec& spec, const KktSolution& sol,
                                                   const CheckConfig& config, DerivativeKind kind) {
  const ActivePartition p = solution_partition(spec, sol, config.tol_act);
  std::vector<WSelector> family = enumerate_b_selectors(p, config.beta_cap);
  if (kind == DerivativeKind::OuterApprox || kind == DerivativeKind::ClarkeSample) {
    std::vector<WSelector> extra = clarke_selectors(p, config.beta_resolution, config.beta_cap);
    if (kind == DerivativeKind::ClarkeSample) family.clear();
    for (auto& w : extra) {
      if (kind == DerivativeKind::OuterApprox && w.binary()) continue;
      family.push_back(std::move(w));
    }
  }
  return collect(spec, sol, family, kind,
                 [&](const WSelector& w) { return Matrix(phi_candidate_gradient(spec, sol, w)); });
}

NonsingularitySummary check_selector_family(const ProblemSpec& spec, const KktSolution& sol,
                                            const std::vector<WSelector>& family) {
  NonsingularitySummary s;
  for (const WSelector& w : family) {
    const PivotReport r = pivot_report(assemble_A(spec, sol, w));
    ++s.checked;
    s.min_pivot = std::min(s.min_pivot, r.min_pivot);
    if (!r.nonsingular) {
      ++s.singular;
      s.failures.push_back(w);
    }
  }
  return s;
}

}  // namespace mmx
