#pragma once

#include <optional>
#include <vector>

#include "minimax/cone.hpp"
#include "minimax/config.hpp"
#include "minimax/generalized_jacobian.hpp"
#include "minimax/lower_level.hpp"

namespace mmx {

class InfeasiblePointError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct UpperActiveSet {
  std::vector<int> active;  // I(x), 0-based indices into G
  int n1 = 0;
};

/// Throws InfeasiblePointError when |H_j| or G_i exceeds tol_act.
UpperActiveSet upper_active_set(const ProblemSpec& spec, const Vector& x, double tol_act);

struct MfcqResult {
  ConditionResult result;
  Vector witness;          // d-bar
  double t_star = 0.0;     // optimal t of the LP (capped at 1)
  double sigma_min = kInf; // of J H
  UpperActiveSet active;
};

MfcqResult check_mfcq(const ProblemSpec& spec, const Vector& x, const CheckConfig& config);

/// {(u, v) : JH^T u + JG^T v = -r0, v >= 0 on I, v = 0 off I}.
struct LambdaPolytope {
  Vector r0;
  UpperActiveSet active;
  int n2 = 0;
  Matrix JH;  // n1 x n
  Matrix JG;  // n2 x n
  bool nonempty = false;
  double fit_residual = 0.0;   // min ||JH^T u + JG^T v + r0||_1 over u, v_I >= 0
  Vector point;                // minimizer (u, v), length n1 + n2
  Vector consistent_rhs;       // JH^T u + JG^T v at that point, the fitted -r0
  bool bounded = false;
  bool enumerated = false;
  std::vector<Vector> vertices;  // each (u, v)
  Vector descent_direction;      // when empty: d in the linearized cone with r0.d < 0
  double descent_value = 0.0;

  bool singleton() const { return nonempty && bounded && enumerated && vertices.size() == 1; }
};

LambdaPolytope upper_kkt_and_polytope(const ProblemSpec& spec, const Vector& x, const Vector& working_grad,
                                      const CheckConfig& config);

struct UpperConeRep {
  PolyhedralCone literal;  // {JH d = 0, grad G_I d <= 0, r0 . d <= 0}
  PolyhedralCone reduced;  // rows with some multiplier v_i > 0 moved to equalities
  std::vector<int> equality_rows;  // indices i in I moved
};

UpperConeRep critical_cone_upper(const ProblemSpec& spec, const Vector& x, const Vector& working_grad,
                                 const LambdaPolytope& polytope, const CheckConfig& config);

struct DirectionEvidence {
  Vector d;
  double q = 0.0;
};

struct SecondOrderResult {
  ConditionResult result;
  std::vector<DirectionEvidence> evidence;  // sampled directions, in sample order
  bool exact = false;
  bool vacuous = false;
  int samples = 0;
  double gamma2 = 0.0;  // growth estimate (sufficient test only)
};

/// q(d) = max over Lambda of d^T (sum u_j hess H_j + sum v_i hess G_i) d
///        + d^T hess_phi d; +inf when the max is unbounded.
double upper_curvature(const ProblemSpec& spec, const Vector& x, const Matrix& hess_phi, const LambdaPolytope& poly,
                       const Vector& d);

SecondOrderResult second_order_necessary(const ProblemSpec& spec, const Vector& x, const Matrix& hess_phi,
                                         const LambdaPolytope& poly, const UpperConeRep& cone,
                                         const CheckConfig& config);

SecondOrderResult second_order_sufficient(const ProblemSpec& spec, const Vector& x, const Matrix& hess_phi,
                                          const LambdaPolytope& poly, const UpperConeRep& cone,
                                          const CheckConfig& config);

struct NonsmoothFirstOrder {
  ConditionResult result;
  std::optional<WSelector> selector;
  Vector u;
  Vector v;
  Vector candidate_gradient;
  int tried = 0;
  int singular = 0;
  bool exhaustive = false;
};

/// Search over B-selectors, then the Clarke grid on beta, for a W whose
/// candidate gradient admits upper multipliers.
NonsmoothFirstOrder first_order_nonsmooth_necessary(const ProblemSpec& spec, const Vector& x,
                                                    const KktSolution& sol, const CheckConfig& config);

}  // namespace mmx
