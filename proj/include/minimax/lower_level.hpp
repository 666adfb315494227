#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "minimax/config.hpp"
#include "minimax/cone.hpp"
#include "minimax/problem.hpp"

namespace mmx {

/// L(x; y, mu, lambda) = f + mu^T h - lambda^T g and its derivative blocks.
struct LagrangianEval {
  double value = 0.0;
  Vector grad_y;
  Vector grad_x;
  Matrix hess_yy;
  Matrix hess_yx;  // m x n
  Matrix hess_xx;
};

LagrangianEval lagrangian(const DerivativeBundle& b, const Vector& mu, const Vector& lambda);

/// Raised when an inequality index fits none of alpha, beta, gamma.
class PartitionError : public std::runtime_error {
 public:
  PartitionError(int index, const std::string& message)
      : std::runtime_error("constraint g" + std::to_string(index + 1) + ": " + message), index_(index) {}
  int index() const noexcept { return index_; }

 private:
  int index_;
};

/// Indices are 0-based.
struct ActivePartition {
  std::vector<int> active;  // I
  std::vector<int> alpha;   // active, lambda > tol
  std::vector<int> beta;    // active, lambda ~ 0
  std::vector<int> gamma;   // inactive
  double tol_act = 0.0;
  int size = 0;
};

ActivePartition classify_partition(const Vector& g, const Vector& lambda, double tol_act);

struct KktResidual {
  Vector residual;  // (grad_y L; h; g - min(lambda + g, 0))
  double norm = 0.0;
};

KktResidual kkt_residual_lower(const ProblemSpec& spec, const Vector& x, const Vector& y, const Vector& mu,
                               const Vector& lambda);

struct MultiplierRecovery {
  Vector mu;
  Vector lambda;
  double residual = 0.0;   // infinity norm of the full KKT residual
  double sigma_min = kInf;  // of [J_y h; grad_y g_I]
  bool licq = true;
  bool kkt_point = false;
  std::string detail;
};

MultiplierRecovery recover_multipliers(const ProblemSpec& spec, const Vector& x, const Vector& y,
                                       const CheckConfig& config);

struct ConeRep {
  PolyhedralCone cone;     // E = [J_y h; grad g_alpha], F = [grad g_beta]
  Matrix affine_rows;      // aff C = ker(affine_rows)
  PolyhedralCone literal;  // {J_y h d = 0, grad g_I d <= 0, grad_y f d <= 0}
};

/// Throws std::invalid_argument when (y, mu, lambda) is not a KKT point to tol_kkt.
ConeRep critical_cone_lower(const ProblemSpec& spec, const Vector& x, const Vector& y, const Vector& mu,
                            const Vector& lambda, const ActivePartition& partition, double tol_kkt = 1e-8);

/// Per-item verdicts for the inner problem; unevaluated items stay inconclusive.
struct LowerConditionsReport {
  ConditionResult kkt;
  ConditionResult licq;
  ConditionResult strict_complementarity;
  ConditionResult sosc;
  ConditionResult second_order_necessary;
  ConditionResult strong_sosc;
  ConditionResult assumption_a;
  ActivePartition partition;
  Vector mu;
  Vector lambda;

  bool jacobian_uniqueness() const {
    return kkt.satisfied() && licq.satisfied() && strict_complementarity.satisfied() && sosc.satisfied();
  }
  std::vector<ConditionResult> all() const;
};

LowerConditionsReport check_jacobian_uniqueness(const ProblemSpec& spec, const Vector& x, const Vector& y,
                                                const Vector& mu, const Vector& lambda, const CheckConfig& config);

LowerConditionsReport check_assumption_a(const ProblemSpec& spec, const Vector& x, const Vector& y,
                                         const CheckConfig& config);

enum class SolutionPath { Smooth, Nonsmooth };
const char* to_string(SolutionPath p);

/// Lower-level KKT triple with squared slacks, as tracked at one x.
struct KktSolution {
  Vector x;
  Vector y;
  Vector w;
  Vector mu;
  Vector lambda;
  double residual = 0.0;
  SolutionPath path = SolutionPath::Smooth;
  std::string solver;          // "squared-slack" or "semismooth"
  std::vector<double> trace;   // residual infinity norm at every iterate
  int iterations = 0;
};

struct KktSeed {
  Vector y;
  Vector mu;      // empty means zeros
  Vector lambda;  // empty means zeros
};

class NewtonError : public std::runtime_error {
 public:
  NewtonError(const std::string& what, std::vector<double> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const { return trace_; }

 private:
  std::vector<double> trace_;
};

/// Newton on the squared-slack KKT system; falls back to semismooth Newton on
/// the projected KKT system when the smooth iteration fails or ends with a
/// negative multiplier.
KktSolution solve_lower(const ProblemSpec& spec, const Vector& x, const KktSeed& seed, const CheckConfig& config);

/// Smooth iteration only; throws NewtonError on failure.
KktSolution solve_lower_smooth(const ProblemSpec& spec, const Vector& x, const KktSeed& seed,
                               const CheckConfig& config);
/// Semismooth iteration only; throws NewtonError on failure.
KktSolution solve_lower_semismooth(const ProblemSpec& spec, const Vector& x, const KktSeed& seed,
                                   const CheckConfig& config);

}  // namespace mmx
