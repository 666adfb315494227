#pragma once

#include <stdexcept>

#include "minimax/linalg.hpp"

namespace mmx {

/// maximize c^T z  s.t.  A_eq z = b_eq,  A_in z <= b_in,  lower <= z <= upper.
/// Bounds may be infinite.
struct LpProblem {
  Vector objective;
  Matrix eq_matrix;
  Vector eq_rhs;
  Matrix in_matrix;
  Vector in_rhs;
  Vector lower;
  Vector upper;

  /// Free variables, no constraints, zero objective.
  static LpProblem with_variables(int count);

  int variables() const { return static_cast<int>(objective.size()); }
  void add_equality(const Vector& row, double rhs);
  void add_inequality(const Vector& row, double rhs);
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus status);

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Vector z;
  double value = 0.0;
  int iterations = 0;
  /// Dual objective reconstructed from the final basis; equals value at an
  /// optimum up to rounding. Used as an independent optimality certificate.
  double dual_value = 0.0;
  /// Largest positive reduced cost under the dual solution (<= 0 at optimum).
  double max_reduced_cost = 0.0;
};

class LpIterationLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense two-phase simplex with Bland's anti-cycling rule.
LpResult solve_lp(const LpProblem& problem, int max_iterations = 20000);

}  // namespace mmx
