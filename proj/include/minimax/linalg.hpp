#pragma once

#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mmx {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Relative pivot threshold used by every nonsingularity decision.
inline constexpr double kPivotTolerance = 1e-12;

class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(const std::string& what, int index, double pivot, double scale)
      : std::runtime_error(what + " (pivot " + std::to_string(pivot) + " at step " + std::to_string(index) +
                           ", scale " + std::to_string(scale) + ")"),
        index_(index),
        pivot_(pivot),
        scale_(scale) {}

  int index() const noexcept { return index_; }
  double pivot() const noexcept { return pivot_; }
  double scale() const noexcept { return scale_; }

 private:
  int index_;
  double pivot_;
  double scale_;
};

/// Outcome of partial-pivoted elimination: smallest pivot met and whether it
/// cleared kPivotTolerance * scale, where scale is the largest |a_ij|.
struct PivotReport {
  bool nonsingular = false;
  double min_pivot = 0.0;
  double scale = 0.0;
  int min_index = -1;
};

/// Dense LU with partial pivoting. Construction never throws; solve() throws
/// SingularMatrixError when the factorization hit a pivot below tolerance.
class LuDecomposition {
 public:
  explicit LuDecomposition(const Matrix& a, double rel_tol = kPivotTolerance);

  const PivotReport& report() const { return report_; }
  bool nonsingular() const { return report_.nonsingular; }

  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;

 private:
  Matrix lu_;
  Eigen::VectorXi perm_;
  PivotReport report_;
};

PivotReport pivot_report(const Matrix& a, double rel_tol = kPivotTolerance);

/// Solve a square system, refining once; throws SingularMatrixError if the
/// matrix is singular to tolerance or the residual bound cannot be met.
Vector solve_linear(const Matrix& a, const Vector& b);
Matrix solve_linear(const Matrix& a, const Matrix& b);

/// Orthonormal basis of {d : A d = 0}; singular values <= tol count as zero.
Matrix nullspace_basis(const Matrix& a, double tol);

/// Largest eigenvalue of basis^T M basis; -inf for an empty basis.
/// Throws std::invalid_argument when M is not symmetric to 1e-10.
double max_eigenvalue_on_subspace(const Matrix& m, const Matrix& basis);
/// Smallest eigenvalue of basis^T M basis; +inf for an empty basis.
double min_eigenvalue_on_subspace(const Matrix& m, const Matrix& basis);

/// Eigenvector of basis^T M basis for the largest (or smallest) eigenvalue,
/// mapped back to the ambient space. Empty basis gives an empty vector.
Vector extreme_eigenvector_on_subspace(const Matrix& m, const Matrix& basis, bool largest);

/// Smallest singular value of a row-stacked matrix, measuring linear
/// independence of its rows: +inf with no rows, 0 when rows outnumber columns.
double smallest_row_singular_value(const Matrix& rows);

/// 2-norm condition number via SVD (+inf when singular).
double condition_number(const Matrix& a);

/// Minimum-norm least-squares solution.
Vector least_squares(const Matrix& a, const Vector& b);

double inf_norm(const Vector& v);
Matrix symmetrize(const Matrix& m);
/// Stack matrices vertically; all must share a column count.
Matrix vstack(std::initializer_list<const Matrix*> blocks, int cols);

}  // namespace mmx
