#include "minimax/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace mmx {

LuDecomposition::LuDecomposition(const Matrix& a, double rel_tol) : lu_(a), perm_(a.rows()) {
  if (a.rows() != a.cols()) throw std::invalid_argument("LU of a non-square matrix");
  const int n = static_cast<int>(a.rows());
  for (int i = 0; i < n; ++i) perm_(i) = i;
  report_.scale = n > 0 ? a.cwiseAbs().maxCoeff() : 0.0;
  report_.min_pivot = kInf;
  report_.nonsingular = true;
  const double threshold = rel_tol * std::max(report_.scale, 1e-300);
  if (n > 0 && report_.scale == 0.0) {
    report_ = {false, 0.0, 0.0, 0};
    return;
  }
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i) {
      if (std::fabs(lu_(i, k)) > std::fabs(lu_(p, k))) p = i;
    }
    const double pivot = std::fabs(lu_(p, k));
    if (pivot < report_.min_pivot) {
      report_.min_pivot = pivot;
      report_.min_index = k;
    }
    if (pivot < threshold) {
      report_.nonsingular = false;
      continue;
    }
    if (p != k) {
      lu_.row(p).swap(lu_.row(k));
      std::swap(perm_(p), perm_(k));
    }
    for (int i = k + 1; i < n; ++i) {
      lu_(i, k) /= lu_(k, k);
      const double factor = lu_(i, k);
      if (factor == 0.0) continue;
      for (int j = k + 1; j < n; ++j) lu_(i, j) -= factor * lu_(k, j);
    }
  }
  if (n == 0) report_.min_pivot = kInf;
}

Vector LuDecomposition::solve(const Vector& b) const {
  if (!report_.nonsingular) {
    throw SingularMatrixError("matrix is singular to tolerance", report_.min_index, report_.min_pivot,
                              report_.scale);
  }
  const int n = static_cast<int>(lu_.rows());
  if (b.size() != n) throw std::invalid_argument("right-hand side size mismatch");
  Vector z(n);
  for (int i = 0; i < n; ++i) z(i) = b(perm_(i));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) z(i) -= lu_(i, j) * z(j);
  }
  for (int i = n - 1; i >= 0; --i) {
    for (int j = i + 1; j < n; ++j) z(i) -= lu_(i, j) * z(j);
    z(i) /= lu_(i, i);
  }
  return z;
}

Matrix LuDecomposition::solve(const Matrix& b) const {
  Matrix out(lu_.rows(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) out.col(j) = solve(Vector(b.col(j)));
  return out;
}

PivotReport pivot_report(const Matrix& a, double rel_tol) { return LuDecomposition(a, rel_tol).report(); }

Vector solve_linear(const Matrix& a, const Vector& b) {
  const LuDecomposition lu(a);
  Vector z = lu.solve(b);
  Vector r = b - a * z;
  const double bound = 1e-10 * (1.0 + inf_norm(b));
  if (inf_norm(r) > bound) {
    z += lu.solve(r);
    r = b - a * z;
    if (inf_norm(r) > bound) {
      throw SingularMatrixError("residual bound not met; matrix is ill-conditioned", lu.report().min_index,
                                lu.report().min_pivot, lu.report().scale);
    }
  }
  return z;
}

Matrix solve_linear(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) out.col(j) = solve_linear(a, Vector(b.col(j)));
  return out;
}

Matrix nullspace_basis(const Matrix& a, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("nullspace tolerance must be positive");
  const Eigen::Index cols = a.cols();
  if (a.rows() == 0 || cols == 0) return Matrix::Identity(cols, cols);
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol) ++rank;
  }
  return svd.matrixV().rightCols(cols - rank);
}

namespace {

Matrix reduced_matrix(const Matrix& m, const Matrix& basis) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix is not square");
  const double asym = m.rows() > 0 ? (m - m.transpose()).cwiseAbs().maxCoeff() : 0.0;
  if (asym > 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("matrix is not symmetric (asymmetry " + std::to_string(asym) + ")");
  }
  if (basis.rows() != m.rows()) throw std::invalid_argument("basis dimension mismatch");
  return symmetrize(basis.transpose() * m * basis);
}

}  // namespace

double max_eigenvalue_on_subspace(const Matrix& m, const Matrix& basis) {
  const Matrix r = reduced_matrix(m, basis);
  if (r.rows() == 0) return -kInf;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(r, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

double min_eigenvalue_on_subspace(const Matrix& m, const Matrix& basis) {
  const Matrix r = reduced_matrix(m, basis);
  if (r.rows() == 0) return kInf;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(r, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

Vector extreme_eigenvector_on_subspace(const Matrix& m, const Matrix& basis, bool largest) {
  const Matrix r = reduced_matrix(m, basis);
  if (r.rows() == 0) return Vector();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(r);
  const Eigen::Index k = largest ? r.rows() - 1 : 0;
  Vector d = basis * eig.eigenvectors().col(k);
  // Fix the sign so results are reproducible.
  Eigen::Index imax = 0;
  d.cwiseAbs().maxCoeff(&imax);
  if (d(imax) < 0) d = -d;
  return d;
}

double smallest_row_singular_value(const Matrix& rows) {
  if (rows.rows() == 0) return kInf;
  if (rows.rows() > rows.cols()) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(rows);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

double condition_number(const Matrix& a) {
  if (a.rows() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : kInf;
}

Vector least_squares(const Matrix& a, const Vector& b) {
  if (a.cols() == 0) return Vector();
  if (a.rows() == 0) return Vector::Zero(a.cols());
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.solve(b);
}

double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Matrix vstack(std::initializer_list<const Matrix*> blocks, int cols) {
  Eigen::Index rows = 0;
  for (const Matrix* b : blocks) {
    if (b->rows() > 0 && b->cols() != cols) throw std::invalid_argument("vstack column mismatch");
    rows += b->rows();
  }
  Matrix out(rows, cols);
  Eigen::Index r = 0;
  for (const Matrix* b : blocks) {
    if (b->rows() == 0) continue;
    out.middleRows(r, b->rows()) = *b;
    r += b->rows();
  }
  return out;
}

}  // namespace mmx
