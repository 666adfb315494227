#pragma once

#include <string>
#include <vector>

#include "minimax/config.hpp"
#include "minimax/lower_level.hpp"

namespace mmx {

Vector project_nonpositive(const Vector& v);

enum class SelectorSource { ForcedZero, ForcedOne, Free };

/// Diagonal element W of the generalized Jacobian of the projection onto the
/// nonpositive orthant: 0 on alpha, 1 on gamma, free on beta.
struct WSelector {
  Vector diag;
  std::vector<SelectorSource> source;

  bool binary() const;
  std::string label() const;  // e.g. "(0,1,0.5)"
};

class SelectorCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All 2^|beta| B-subdifferential selectors, in ascending beta-bitmask order
/// (bit k set means the k-th beta index gets 1).
std::vector<WSelector> enumerate_b_selectors(const ActivePartition& partition, int cap = 16);

/// Clarke-box sample on beta: the full tensor grid of `resolution` points per
/// index when it has at most 4096 members, otherwise one axis sweep per index
/// with the other beta entries at 1/2.
std::vector<WSelector> clarke_selectors(const ActivePartition& partition, int resolution, int cap = 16);

/// A(x,W) on (y, mu, lambda) as the exact derivative of the projected KKT map:
///   [ Lyy        Jh^T  -Jg^T ]
///   [ Jh         0      0    ]
///   [ (I-W)Jg    0     -W    ]
/// The lambda column is the negation of the displayed form.
Matrix assemble_A(const ProblemSpec& spec, const KktSolution& sol, const WSelector& w);

/// Right-hand side (Lyx; Jxh; (I-W)Jxg).
Matrix assemble_A_rhs(const ProblemSpec& spec, const KktSolution& sol, const WSelector& w);

/// H(x,W) = A(x,W)^{-1} (Lyx; Jxh; (I-W)Jxg). Throws SingularMatrixError.
Matrix assemble_H(const ProblemSpec& spec, const KktSolution& sol, const WSelector& w);

/// Candidate gradient of phi for one selector:
/// grad_x L - H(x,W)^T (grad_y L; h; -g).
Vector phi_candidate_gradient(const ProblemSpec& spec, const KktSolution& sol, const WSelector& w);

enum class DerivativeKind { Directional, BSubdifferential, ClarkeSample, OuterApprox };
const char* to_string(DerivativeKind k);

struct GeneralizedDerivative {
  WSelector selector;
  Matrix value;  // a column for vectors
  PivotReport pivots;
  bool singular = false;
};

struct GeneralizedDerivativeSet {
  DerivativeKind kind = DerivativeKind::Directional;
  std::vector<GeneralizedDerivative> members;

  int nonsingular_count() const;
};

/// Partition of the inequalities at the tracked solution.
ActivePartition solution_partition(const ProblemSpec& spec, const KktSolution& sol, double tol_act);

/// Candidates -A(x,W)^{-1}(Lyx d; Jxh d; (I-W)Jxg d) over all B-selectors.
GeneralizedDerivativeSet kkt_map_directional(const ProblemSpec& spec, const KktSolution& sol, const Vector& dx,
                                             const CheckConfig& config);

/// Candidate gradients of phi; kind BSubdifferential uses B-selectors, kind
/// OuterApprox appends the Clarke-box sample.
GeneralizedDerivativeSet phi_generalized_gradients(const ProblemSpec& spec, const KktSolution& sol,
                                                   const CheckConfig& config,
                                                   DerivativeKind kind = DerivativeKind::BSubdifferential);

/// Nonsingularity of A(x,W) over a selector family.
struct NonsingularitySummary {
  int checked = 0;
  int singular = 0;
  double min_pivot = kInf;
  std::vector<WSelector> failures;
};

NonsingularitySummary check_selector_family(const ProblemSpec& spec, const KktSolution& sol,
                                            const std::vector<WSelector>& family);

}  // namespace mmx
