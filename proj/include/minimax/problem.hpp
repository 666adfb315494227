#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "minimax/expression.hpp"
#include "minimax/linalg.hpp"

namespace mmx {

/// Problem-file syntax or validation failure, with 1-based position.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                           message),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Invalid problem construction (dimension mismatch, y in an upper constraint).
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Dimensions {
  int n = 0;   // upper variables x
  int m = 0;   // lower variables y
  int m1 = 0;  // lower equalities h(x,y) = 0
  int m2 = 0;  // lower inequalities g(x,y) <= 0
  int n1 = 0;  // upper equalities H(x) = 0
  int n2 = 0;  // upper inequalities G(x) <= 0

  bool operator==(const Dimensions&) const = default;
};

/// Value, gradient and Hessian blocks of one scalar function at a point.
/// For upper-level constraints the y-blocks are empty.
struct FunctionDerivatives {
  double value = 0.0;
  Vector dx;
  Vector dy;
  Matrix dxx;
  Matrix dxy;  // n x m, entry (i,j) = d2/dx_i dy_j
  Matrix dyy;
};

/// Everything the optimality checks need at one (x, y).
struct DerivativeBundle {
  Vector x;
  Vector y;
  FunctionDerivatives f;
  std::vector<FunctionDerivatives> h;
  std::vector<FunctionDerivatives> g;
  std::vector<FunctionDerivatives> H;
  std::vector<FunctionDerivatives> G;

  Vector h_values() const;
  Vector g_values() const;
  Vector H_values() const;
  Vector G_values() const;
  Matrix h_jac_x() const;  // m1 x n
  Matrix h_jac_y() const;  // m1 x m
  Matrix g_jac_x() const;  // m2 x n
  Matrix g_jac_y() const;  // m2 x m
  Matrix H_jac() const;    // n1 x n
  Matrix G_jac() const;    // n2 x n
};

/// A constrained minimax instance  min_{x in Phi} max_{y in Y(x)} f(x,y).
///
/// Construction validates dimensions and the upper-constraint rule, then
/// differentiates every function symbolically once; the derivative tables
/// are shared between copies.
class ProblemSpec {
 public:
  ProblemSpec(Dimensions dims, Expr f, std::vector<Expr> h, std::vector<Expr> g, std::vector<Expr> H,
              std::vector<Expr> G);

  const Dimensions& dims() const { return dims_; }
  const Expr& f() const { return f_; }
  const std::vector<Expr>& h() const { return h_; }
  const std::vector<Expr>& g() const { return g_; }
  const std::vector<Expr>& H() const { return H_; }
  const std::vector<Expr>& G() const { return G_; }

  bool contains_abs() const;

  struct Tables;
  const Tables& tables() const { return *tables_; }

 private:
  Dimensions dims_;
  Expr f_;
  std::vector<Expr> h_, g_, H_, G_;
  std::shared_ptr<const Tables> tables_;
};

bool operator==(const ProblemSpec& a, const ProblemSpec& b);

/// Parse the line-oriented problem format (see README). Throws ParseError.
ProblemSpec parse_problem(std::string_view text);
/// Parse a single expression; variables are checked against the given sizes.
Expr parse_expression(std::string_view text, int n, int m);

std::string serialize_problem(const ProblemSpec& spec);

/// FNV-1a hash of the serialized problem, as 16 hex digits.
std::string problem_digest(const ProblemSpec& spec);

/// Evaluate values and exact first/second derivatives of every function.
/// Throws DomainError naming the failing function and subexpression.
DerivativeBundle eval_bundle(const ProblemSpec& spec, const Vector& x, const Vector& y);

/// Upper-level functions only (H, G); f, h, g are left empty.
DerivativeBundle eval_upper_bundle(const ProblemSpec& spec, const Vector& x);

/// Candidate (x*, y*) with optional multipliers.
struct CandidatePoint {
  Vector x;
  Vector y;
  std::optional<Vector> mu;
  std::optional<Vector> lambda;
  std::optional<Vector> u;
  std::optional<Vector> v;
};

/// Throws SpecError when a candidate does not fit the problem.
void validate_candidate(const ProblemSpec& spec, const CandidatePoint& c);

/// Throws SpecError when an expression contains abs (smoothness required).
void require_smooth(const ProblemSpec& spec);

namespace fixtures {
// Reference instances used by the tests and shipped under fixtures/.
extern const char* const kP1;         // f = x y - y^2/2, g = y - 1, G = x - 2
extern const char* const kP2;         // f = -(y - x)^2, g = y
extern const char* const kP3;         // G1 = x, G2 = -x (MFCQ fails at 0)
extern const char* const kP4;         // P1 with G = 1 - x
extern const char* const kP1Flipped;  // phi(x) = -x^2/2, no upper constraints
ProblemSpec p1();
ProblemSpec p2();
ProblemSpec p3();
ProblemSpec p4();
ProblemSpec p1_flipped();
}  // namespace fixtures

}  // namespace mmx
