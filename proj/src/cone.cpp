#include "minimax/cone.hpp"

#include <random>

#include "minimax/lp.hpp"

namespace mmx {

PolyhedralCone PolyhedralCone::whole_space(int dim) {
  return PolyhedralCone{dim, Matrix(0, dim), Matrix(0, dim)};
}

bool PolyhedralCone::contains(const Vector& d, double tol) const {
  if (equalities.rows() > 0 && inf_norm(equalities * d) > tol) return false;
  if (inequalities.rows() > 0 && (inequalities * d).maxCoeff() > tol) return false;
  return true;
}

ConeStructure analyze_cone(const PolyhedralCone& cone, double tol) {
  const int n = cone.dim;
  std::vector<int> implicit;
  std::vector<int> strict;
  for (int j = 0; j < cone.inequalities.rows(); ++j) {
    // min F_j d over the cone intersected with the unit box.
    LpProblem lp = LpProblem::with_variables(n);
    lp.objective = -cone.inequalities.row(j).transpose();
    lp.lower.setConstant(-1.0);
    lp.upper.setConstant(1.0);
    for (int i = 0; i < cone.equalities.rows(); ++i) lp.add_equality(cone.equalities.row(i).transpose(), 0.0);
    for (int i = 0; i < cone.inequalities.rows(); ++i) lp.add_inequality(cone.inequalities.row(i).transpose(), 0.0);
    const LpResult r = solve_lp(lp);
    if (r.status == LpStatus::Optimal && r.value > tol) {
      strict.push_back(j);
    } else {
      implicit.push_back(j);
    }
  }
  ConeStructure s;
  s.equalities = Matrix(cone.equalities.rows() + static_cast<int>(implicit.size()), n);
  s.equalities.topRows(cone.equalities.rows()) = cone.equalities;
  for (std::size_t k = 0; k < implicit.size(); ++k) {
    s.equalities.row(cone.equalities.rows() + static_cast<int>(k)) = cone.inequalities.row(implicit[k]);
  }
  s.strict = Matrix(static_cast<int>(strict.size()), n);
  for (std::size_t k = 0; k < strict.size(); ++k) s.strict.row(static_cast<int>(k)) = cone.inequalities.row(strict[k]);
  s.lineality = nullspace_basis(s.equalities, tol);
  return s;
}

Matrix face_basis(const ConeStructure& cone, const std::vector<int>& active, double tol) {
  const int n = static_cast<int>(cone.lineality.rows());
  Matrix rows(cone.equalities.rows() + static_cast<int>(active.size()), n);
  rows.topRows(cone.equalities.rows()) = cone.equalities;
  for (std::size_t k = 0; k < active.size(); ++k) rows.row(cone.equalities.rows() + static_cast<int>(k)) = cone.strict.row(active[k]);
  return nullspace_basis(rows, tol);
}

namespace {

std::vector<std::vector<int>> faces(int rows, int cap) {
  std::vector<std::vector<int>> out;
  if (rows <= cap) {
    for (unsigned mask = 0; mask < (1u << rows); ++mask) {
      std::vector<int> s;
      for (int j = 0; j < rows; ++j) {
        if (mask & (1u << j)) s.push_back(j);
      }
      out.push_back(std::move(s));
    }
    return out;
  }
  out.push_back({});
  for (int a = 0; a < rows; ++a) out.push_back({a});
  for (int a = 0; a < rows; ++a) {
    for (int b = a + 1; b < rows; ++b) out.push_back({a, b});
  }
  return out;
}

}  // namespace

std::vector<Vector> sample_cone(const ConeStructure& cone, const ConeSampleOptions& opt) {
  std::vector<Vector> out;
  if (cone.trivial()) return out;
  const int strict = static_cast<int>(cone.strict.rows());
  auto feasible = [&](const Vector& d) {
    return strict == 0 || (cone.strict * d).maxCoeff() <= opt.tol * (1.0 + d.norm());
  };
  auto push_unique = [&](Vector d) {
    const double nrm = d.norm();
    if (nrm <= 1e-12) return;
    d /= nrm;
    for (const Vector& e : out) {
      if ((e - d).norm() <= 1e-10) return;
    }
    out.push_back(std::move(d));
  };

  std::vector<Matrix> bases;
  for (const auto& active : faces(strict, opt.face_cap)) {
    Matrix b = face_basis(cone, active, opt.tol);
    if (b.cols() == 0) continue;
    bases.push_back(b);
    for (int k = 0; k < b.cols(); ++k) {
      for (double s : {1.0, -1.0}) {
        const Vector d = s * b.col(k);
        if (feasible(d)) push_unique(d);
      }
    }
  }

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  int drawn = 0;
  int attempts = 0;
  const int max_attempts = 50 * std::max(1, opt.random_count);
  while (drawn < opt.random_count && attempts < max_attempts && !bases.empty()) {
    const Matrix& b = bases[static_cast<std::size_t>(attempts % static_cast<int>(bases.size()))];
    ++attempts;
    Vector z(b.cols());
    for (int k = 0; k < z.size(); ++k) z(k) = normal(rng);
    const Vector d = b * z;
    if (!feasible(d)) continue;
    ++drawn;
    push_unique(d);
  }
  return out;
}

}  // namespace mmx
