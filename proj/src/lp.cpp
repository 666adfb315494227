#include "minimax/lp.hpp"

#include <cmath>
#include <vector>

namespace mmx {

LpProblem LpProblem::with_variables(int count) {
  LpProblem p;
  p.objective = Vector::Zero(count);
  p.eq_matrix = Matrix(0, count);
  p.eq_rhs = Vector(0);
  p.in_matrix = Matrix(0, count);
  p.in_rhs = Vector(0);
  p.lower = Vector::Constant(count, -kInf);
  p.upper = Vector::Constant(count, kInf);
  return p;
}

namespace {

void append_row(Matrix& m, Vector& rhs, const Vector& row, double value) {
  if (row.size() != m.cols()) throw std::invalid_argument("LP row has wrong length");
  m.conservativeResize(m.rows() + 1, Eigen::NoChange);
  m.row(m.rows() - 1) = row.transpose();
  rhs.conservativeResize(rhs.size() + 1);
  rhs(rhs.size() - 1) = value;
}

constexpr double kPivotEps = 1e-10;
constexpr double kCostEps = 1e-9;

// Dense tableau over standard-form columns; the last column holds the rhs.
struct Tableau {
  Matrix t;
  std::vector<int> basis;

  int rows() const { return static_cast<int>(t.rows()); }
  int cols() const { return static_cast<int>(t.cols()) - 1; }
  double rhs(int i) const { return t(i, t.cols() - 1); }

  void pivot(int r, int c) {
    t.row(r) /= t(r, c);
    for (int i = 0; i < rows(); ++i) {
      if (i != r && t(i, c) != 0.0) t.row(i) -= t(i, c) * t.row(r);
    }
    basis[static_cast<std::size_t>(r)] = c;
  }

  void remove_row(int r) {
    const int last = rows() - 1;
    if (r != last) {
      t.row(r) = t.row(last);
      basis[static_cast<std::size_t>(r)] = basis[static_cast<std::size_t>(last)];
    }
    t.conservativeResize(last, Eigen::NoChange);
    basis.pop_back();
  }
};

enum class Phase { Optimal, Unbounded };

// Maximize cost^T s over columns with allowed[j]; Bland's rule throughout.
Phase run_simplex(Tableau& tab, const Vector& cost, const std::vector<bool>& allowed, int& iterations,
                  int max_iterations) {
  for (;;) {
    int entering = -1;
    for (int j = 0; j < tab.cols(); ++j) {
      if (!allowed[static_cast<std::size_t>(j)]) continue;
      double reduced = cost(j);
      for (int i = 0; i < tab.rows(); ++i) reduced -= cost(tab.basis[static_cast<std::size_t>(i)]) * tab.t(i, j);
      if (reduced > kCostEps) {
        entering = j;
        break;
      }
    }
    if (entering < 0) return Phase::Optimal;
    int leaving = -1;
    double best_ratio = kInf;
    for (int i = 0; i < tab.rows(); ++i) {
      const double a = tab.t(i, entering);
      if (a <= kPivotEps) continue;
      const double ratio = tab.rhs(i) / a;
      if (ratio < best_ratio - 1e-12 ||
          (std::fabs(ratio - best_ratio) <= 1e-12 &&
           tab.basis[static_cast<std::size_t>(i)] < tab.basis[static_cast<std::size_t>(leaving)])) {
        best_ratio = ratio;
        leaving = i;
      }
    }
    if (leaving < 0) return Phase::Unbounded;
    if (++iterations > max_iterations) throw LpIterationLimit("simplex iteration limit exceeded");
    tab.pivot(leaving, entering);
  }
}

}  // namespace

void LpProblem::add_equality(const Vector& row, double rhs) { append_row(eq_matrix, eq_rhs, row, rhs); }
void LpProblem::add_inequality(const Vector& row, double rhs) { append_row(in_matrix, in_rhs, row, rhs); }

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal:
      return "optimal";
    case LpStatus::Infeasible:
      return "infeasible";
    case LpStatus::Unbounded:
      return "unbounded";
  }
  return "?";
}

LpResult solve_lp(const LpProblem& p, int max_iterations) {
  const int n = p.variables();
  if (p.lower.size() != n || p.upper.size() != n || p.eq_matrix.cols() != n || p.in_matrix.cols() != n ||
      p.eq_rhs.size() != p.eq_matrix.rows() || p.in_rhs.size() != p.in_matrix.rows()) {
    throw std::invalid_argument("inconsistent LP dimensions");
  }
  for (int j = 0; j < n; ++j) {
    if (p.lower(j) > p.upper(j)) return LpResult{LpStatus::Infeasible, Vector(), 0.0, 0, 0.0, 0.0};
  }

  // z = offset + map * s with s >= 0.
  std::vector<std::pair<int, double>> columns;  // (original variable, coefficient)
  Vector offset = Vector::Zero(n);
  std::vector<std::pair<int, double>> bound_rows;  // (std column, width) for s <= width
  for (int j = 0; j < n; ++j) {
    const double lo = p.lower(j);
    const double hi = p.upper(j);
    if (std::isfinite(lo)) {
      offset(j) = lo;
      columns.emplace_back(j, 1.0);
      if (std::isfinite(hi)) bound_rows.emplace_back(static_cast<int>(columns.size()) - 1, hi - lo);
    } else if (std::isfinite(hi)) {
      offset(j) = hi;
      columns.emplace_back(j, -1.0);
    } else {
      columns.emplace_back(j, 1.0);
      columns.emplace_back(j, -1.0);
    }
  }
  const int ns = static_cast<int>(columns.size());
  Matrix map = Matrix::Zero(n, ns);
  for (int k = 0; k < ns; ++k) map(columns[static_cast<std::size_t>(k)].first, k) = columns[static_cast<std::size_t>(k)].second;

  const int meq = static_cast<int>(p.eq_matrix.rows());
  const int min = static_cast<int>(p.in_matrix.rows()) + static_cast<int>(bound_rows.size());
  const int rows = meq + min;
  const int structural = ns + min;  // std variables plus slacks
  const int total = structural + rows;

  Matrix a = Matrix::Zero(rows, structural);
  Vector b(rows);
  a.topLeftCorner(meq, ns) = p.eq_matrix * map;
  b.head(meq) = p.eq_rhs - p.eq_matrix * offset;
  const int nin = static_cast<int>(p.in_matrix.rows());
  a.block(meq, 0, nin, ns) = p.in_matrix * map;
  b.segment(meq, nin) = p.in_rhs - p.in_matrix * offset;
  for (std::size_t k = 0; k < bound_rows.size(); ++k) {
    const int r = meq + nin + static_cast<int>(k);
    a(r, bound_rows[k].first) = 1.0;
    b(r) = bound_rows[k].second;
  }
  for (int k = 0; k < min; ++k) a(meq + k, ns + k) = 1.0;
  for (int i = 0; i < rows; ++i) {
    if (b(i) < 0) {
      a.row(i) *= -1.0;
      b(i) = -b(i);
    }
  }

  Tableau tab;
  tab.t = Matrix::Zero(rows, total + 1);
  tab.t.leftCols(structural) = a;
  tab.t.block(0, structural, rows, rows) = Matrix::Identity(rows, rows);
  tab.t.col(total) = b;
  tab.basis.resize(static_cast<std::size_t>(rows));
  for (int i = 0; i < rows; ++i) tab.basis[static_cast<std::size_t>(i)] = structural + i;
  // Original row of each tableau row, tracked through redundant-row removal.
  std::vector<int> row_origin(static_cast<std::size_t>(rows));
  for (int i = 0; i < rows; ++i) row_origin[static_cast<std::size_t>(i)] = i;

  LpResult result;
  std::vector<bool> allowed(static_cast<std::size_t>(total), true);
  Vector phase1_cost = Vector::Zero(total);
  phase1_cost.tail(rows).setConstant(-1.0);
  run_simplex(tab, phase1_cost, allowed, result.iterations, max_iterations);
  double infeasibility = 0.0;
  for (int i = 0; i < tab.rows(); ++i) {
    if (tab.basis[static_cast<std::size_t>(i)] >= structural) infeasibility += tab.rhs(i);
  }
  if (infeasibility > 1e-9 * (1.0 + inf_norm(b))) {
    result.status = LpStatus::Infeasible;
    return result;
  }

  // Drive zero-level artificials out of the basis; drop redundant rows.
  for (int i = tab.rows() - 1; i >= 0; --i) {
    if (tab.basis[static_cast<std::size_t>(i)] < structural) continue;
    int col = -1;
    for (int j = 0; j < structural; ++j) {
      if (std::fabs(tab.t(i, j)) > kPivotEps) {
        col = j;
        break;
      }
    }
    if (col >= 0) {
      tab.pivot(i, col);
    } else {
      const int last = tab.rows() - 1;
      row_origin[static_cast<std::size_t>(i)] = row_origin[static_cast<std::size_t>(last)];
      row_origin.pop_back();
      tab.remove_row(i);
    }
  }
  for (int j = structural; j < total; ++j) allowed[static_cast<std::size_t>(j)] = false;

  Vector cost = Vector::Zero(total);
  cost.head(ns) = map.transpose() * p.objective;
  if (run_simplex(tab, cost, allowed, result.iterations, max_iterations) == Phase::Unbounded) {
    result.status = LpStatus::Unbounded;
    return result;
  }

  Vector s = Vector::Zero(total);
  for (int i = 0; i < tab.rows(); ++i) s(tab.basis[static_cast<std::size_t>(i)]) = tab.rhs(i);
  result.status = LpStatus::Optimal;
  result.z = offset + map * s.head(ns);
  result.value = p.objective.dot(result.z);

  // Dual certificate from the original (sign-normalized) rows of the basis.
  const int kept = tab.rows();
  Matrix basis_matrix(kept, kept);
  Vector basis_cost(kept);
  Vector kept_rhs(kept);
  Matrix kept_rows(kept, structural);
  for (int i = 0; i < kept; ++i) {
    kept_rows.row(i) = a.row(row_origin[static_cast<std::size_t>(i)]);
    kept_rhs(i) = b(row_origin[static_cast<std::size_t>(i)]);
  }
  for (int k = 0; k < kept; ++k) {
    basis_matrix.col(k) = kept_rows.col(tab.basis[static_cast<std::size_t>(k)]);
    basis_cost(k) = cost(tab.basis[static_cast<std::size_t>(k)]);
  }
  if (kept > 0) {
    const Vector dual = solve_linear(Matrix(basis_matrix.transpose()), basis_cost);
    result.dual_value = kept_rhs.dot(dual) + p.objective.dot(offset);
    const Vector reduced = cost.head(structural) - kept_rows.transpose() * dual;
    result.max_reduced_cost = reduced.size() ? reduced.maxCoeff() : 0.0;
  } else {
    result.dual_value = p.objective.dot(offset);
    result.max_reduced_cost = cost.head(structural).size() ? cost.head(structural).maxCoeff() : 0.0;
  }
  return result;
}

}  // namespace mmx
