#pragma once

#include <cstdint>
#include <vector>

#include "minimax/linalg.hpp"

namespace mmx {

/// {d : E d = 0, F d <= 0} in R^dim.
struct PolyhedralCone {
  int dim = 0;
  Matrix equalities;    // E, rows x dim
  Matrix inequalities;  // F, rows x dim

  static PolyhedralCone whole_space(int dim);
  bool contains(const Vector& d, double tol) const;
};

/// Cone rewritten with its implicit equalities made explicit: every row left
/// in `strict` admits a cone direction with F_j d < 0.
struct ConeStructure {
  Matrix equalities;  // E plus implicit-equality rows of F
  Matrix strict;      // remaining inequality rows
  Matrix lineality;   // orthonormal basis of ker(equalities)

  bool trivial() const { return strict.rows() == 0 && lineality.cols() == 0; }
  bool subspace() const { return strict.rows() == 0; }
};

ConeStructure analyze_cone(const PolyhedralCone& cone, double tol);

struct ConeSampleOptions {
  int random_count = 128;
  int face_cap = 12;  // beyond this many strict rows only faces of size <= 2 are visited
  std::uint64_t seed = 1;
  double tol = 1e-9;
};

/// Deterministic unit directions in the cone: +-basis vectors of every
/// enumerated face (rays of 1-dimensional faces included) followed by
/// Gaussian samples drawn face by face. Empty for the trivial cone.
std::vector<Vector> sample_cone(const ConeStructure& cone, const ConeSampleOptions& opt);

/// Orthonormal basis of the face where the rows in `active` of the strict
/// block hold with equality.
Matrix face_basis(const ConeStructure& cone, const std::vector<int>& active, double tol);

}  // namespace mmx
