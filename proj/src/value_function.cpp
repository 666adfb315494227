#include "minimax/value_function.hpp"

#include <utility>

namespace mmx {

SensitivitySystem assemble_sensitivity_system(const ProblemSpec& spec, const KktSolution& sol, double cond_warning) {
  const Dimensions& d = spec.dims();
  if (sol.y.size() != d.m || sol.w.size() != d.m2 || sol.mu.size() != d.m1 || sol.lambda.size() != d.m2 ||
      sol.x.size() != d.n) {
    throw std::invalid_argument("assemble_sensitivity_system: dimension mismatch");
  }
  const DerivativeBundle b = eval_bundle(spec, sol.x, sol.y);
  const LagrangianEval l = lagrangian(b, sol.mu, sol.lambda);
  SensitivitySystem s;
  s.y = {0, d.m};
  s.w = {d.m, d.m2};
  s.mu = {d.m + d.m2, d.m1};
  s.lambda = {d.m + d.m2 + d.m1, d.m2};
  const int size = d.m + 2 * d.m2 + d.m1;
  const Matrix jh = b.h_jac_y(), jg = b.g_jac_y();
  s.K = Matrix::Zero(size, size);
  s.K.block(s.y.offset, s.y.offset, d.m, d.m) = l.hess_yy;
  s.K.block(s.y.offset, s.mu.offset, d.m, d.m1) = jh.transpose();
  s.K.block(s.y.offset, s.lambda.offset, d.m, d.m2) = jg.transpose();
  s.K.block(s.w.offset, s.w.offset, d.m2, d.m2) = (-2.0 * sol.lambda).asDiagonal();
  s.K.block(s.w.offset, s.lambda.offset, d.m2, d.m2) = (2.0 * sol.w).asDiagonal();
  s.K.block(s.mu.offset, s.y.offset, d.m1, d.m) = jh;
  s.K.block(s.lambda.offset, s.y.offset, d.m2, d.m) = jg;
  s.K.block(s.lambda.offset, s.w.offset, d.m2, d.m2) = (2.0 * sol.w).asDiagonal();

  s.N = Matrix::Zero(size, d.n);
  s.N.block(s.y.offset, 0, d.m, d.n) = l.hess_yx;
  s.N.block(s.mu.offset, 0, d.m1, d.n) = b.h_jac_x();
  s.N.block(s.lambda.offset, 0, d.m2, d.n) = b.g_jac_x();

  s.pivots = pivot_report(s.K);
  s.condition = size == 0 ? 1.0 : condition_number(s.K);
  s.ill_conditioned = !(s.condition <= cond_warning);
  return s;
}

double phi_value(const ProblemSpec& spec, const KktSolution& sol) {
  return spec.f().evaluate(std::span<const double>(sol.x.data(), static_cast<std::size_t>(sol.x.size())),
                           std::span<const double>(sol.y.data(), static_cast<std::size_t>(sol.y.size())));
}

Vector phi_gradient(const ProblemSpec& spec, const KktSolution& sol) {
  const DerivativeBundle b = eval_bundle(spec, sol.x, sol.y);
  return lagrangian(b, sol.mu, sol.lambda).grad_x;
}

Matrix phi_hessian(const ProblemSpec& spec, const KktSolution& sol, const SensitivitySystem& sys, double* asymmetry) {
  const DerivativeBundle b = eval_bundle(spec, sol.x, sol.y);
  const LagrangianEval l = lagrangian(b, sol.mu, sol.lambda);
  Matrix hess = l.hess_xx;
  if (sys.K.rows() > 0) hess -= sys.N.transpose() * solve_linear(sys.K, sys.N);
  if (asymmetry) *asymmetry = hess.size() ? (hess - hess.transpose()).cwiseAbs().maxCoeff() : 0.0;
  return symmetrize(hess);
}

Matrix phi_hessian(const ProblemSpec& spec, const KktSolution& sol, double* asymmetry) {
  return phi_hessian(spec, sol, assemble_sensitivity_system(spec, sol), asymmetry);
}

TrackedValueFunction::TrackedValueFunction(ProblemSpec spec, KktSolution base, CheckConfig config)
    : spec_(std::move(spec)), base_(std::move(base)), config_(std::move(config)) {}

KktSolution TrackedValueFunction::solve(const Vector& x) const {
  return solve_lower(spec_, x, KktSeed{base_.y, base_.mu, base_.lambda}, config_);
}

double TrackedValueFunction::operator()(const Vector& x) const { return phi_value(spec_, solve(x)); }

}  // namespace mmx
