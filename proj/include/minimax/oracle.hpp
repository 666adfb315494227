#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "minimax/problem.hpp"

namespace mmx {

struct FdResult {
  Vector gradient;
  Matrix hessian;  // symmetrized
};

/// Central differences: gradient with `step`, Hessian with `hess_step`
/// (defaults to `step`). Evaluation failures propagate.
FdResult fd_derivatives(const std::function<double(const Vector&)>& field, const Vector& point, double step,
                        double hess_step = 0.0);

struct GridMax {
  Vector y;
  double value = 0.0;
  long feasible = 0;
  long evaluated = 0;
};

class EmptyGridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Best point of the grid center + k*step (|k| <= radius/step per axis,
/// Euclidean ball of the radius) that satisfies |h| <= tol and g <= tol at x.
/// Throws EmptyGridError when no grid point is feasible.
GridMax grid_local_maximize(const ProblemSpec& spec, const Vector& x, const Vector& center, double radius, double step,
                            double tol = 1e-9);

/// Same, with `points` grid points per axis spanning [-radius, radius].
GridMax grid_local_maximize_points(const ProblemSpec& spec, const Vector& x, const Vector& center, double radius,
                                   int points, double tol = 1e-9);

struct GridSpec {
  double radius = 0.1;   // delta_0
  double step = 1e-3;    // grid resolution
  double eta = 2.0;      // eta(delta) = eta * delta
  double tol = 1e-9;     // comparison tolerance
  int levels = 4;        // delta_0, delta_0/2, ...
  long max_evaluations = 20000000;
};

struct DefinitionCheck {
  bool pass = true;
  double worst_violation = 0.0;  // max over both inequalities of the excess
  std::string side;              // "left" (inner maximality) or "right" (outer)
  std::optional<Vector> witness_x;
  std::optional<Vector> witness_y;
  double delta = 0.0;            // level at which the worst violation occurred
  double effective_step = 0.0;
  long empty_inner = 0;          // x points with no feasible inner grid point
  long evaluations = 0;
};

/// Grid test of the local minimax definition with eta(delta) = c * delta.
/// Only for n <= 2 and m <= 2.
DefinitionCheck verify_minimax_definition(const ProblemSpec& spec, const Vector& x_star, const Vector& y_star,
                                          const GridSpec& grid);

}  // namespace mmx
