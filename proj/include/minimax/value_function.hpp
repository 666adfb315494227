#pragma once

#include "minimax/config.hpp"
#include "minimax/lower_level.hpp"
#include "minimax/problem.hpp"

namespace mmx {

struct BlockRange {
  int offset = 0;
  int size = 0;
};

/// K(x) and N(x) in the variable order (y, w, mu, lambda).
/// K is the symmetric matrix with blocks
///   [ Lyy   0          Jh^T  Jg^T      ]
///   [ 0     -2 Diag(l) 0     2 Diag(w) ]
///   [ Jh    0          0     0         ]
///   [ Jg    2 Diag(w)  0     0         ]
/// and N = (Lyx; 0; Jxh; Jxg).
struct SensitivitySystem {
  Matrix K;
  Matrix N;
  BlockRange y, w, mu, lambda;
  PivotReport pivots;
  double condition = 0.0;
  bool ill_conditioned = false;
};

SensitivitySystem assemble_sensitivity_system(const ProblemSpec& spec, const KktSolution& sol,
                                              double cond_warning = 1e12);

/// f(x, y(x)).
double phi_value(const ProblemSpec& spec, const KktSolution& sol);

/// grad phi = grad_x L at the tracked solution.
Vector phi_gradient(const ProblemSpec& spec, const KktSolution& sol);

/// hess phi = Lxx - N^T K^{-1} N, symmetrized; `asymmetry` receives the
/// largest |M - M^T| entry before symmetrization. Throws SingularMatrixError.
Matrix phi_hessian(const ProblemSpec& spec, const KktSolution& sol, double* asymmetry = nullptr);
Matrix phi_hessian(const ProblemSpec& spec, const KktSolution& sol, const SensitivitySystem& sys,
                   double* asymmetry = nullptr);

/// The local value function x -> f(x, y(x)) with y(x) tracked by Newton from
/// a fixed base solution.
class TrackedValueFunction {
 public:
  TrackedValueFunction(ProblemSpec spec, KktSolution base, CheckConfig config);

  KktSolution solve(const Vector& x) const;
  double operator()(const Vector& x) const;

  const KktSolution& base() const { return base_; }

 private:
  ProblemSpec spec_;
  KktSolution base_;
  CheckConfig config_;
};

}  // namespace mmx
