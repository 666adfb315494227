#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>

namespace mmx {

enum class VarKind : std::uint8_t { X, Y };

/// Zero-based variable reference: x1 is {X, 0}, y2 is {Y, 1}.
struct VarId {
  VarKind kind = VarKind::X;
  int index = 0;

  auto operator<=>(const VarId&) const = default;
};

/// Raised when an expression is evaluated outside its domain (log of a
/// nonpositive number, division by zero, ...). The message names the
/// offending subexpression.
class DomainError : public std::runtime_error {
 public:
  DomainError(const std::string& what, std::string expression)
      : std::runtime_error(what + " in '" + expression + "'"),
        expression_(std::move(expression)) {}

  const std::string& expression() const noexcept { return expression_; }

 private:
  std::string expression_;
};

/// Immutable symbolic scalar expression over x- and y-variables.
///
/// Nodes are shared and never mutated, so copies are cheap and an Expr may be
/// used from several threads at once. The factory functions apply light
/// algebraic simplification (constant folding, additive/multiplicative
/// identities) so that repeated differentiation stays compact.
class Expr {
 public:
  enum class Op : std::uint8_t {
    Const,
    Var,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
    Sign,  // only produced by differentiating abs
  };

  /// The constant 0.
  Expr();

  static Expr constant(double value);
  static Expr variable(VarId id);
  static Expr x(int index) { return variable({VarKind::X, index}); }
  static Expr y(int index) { return variable({VarKind::Y, index}); }

  /// Unary function application (Neg, Sin, Cos, Exp, Log, Sqrt, Abs, Sign).
  static Expr apply(Op fn, const Expr& arg);
  static Expr pow(const Expr& base, const Expr& exponent);

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

  Op op() const;
  bool is_constant() const { return op() == Op::Const; }
  bool is_constant(double value) const;
  /// Constant value; only meaningful when is_constant().
  double constant_value() const;
  /// Variable id; only meaningful when op() == Op::Var.
  VarId var() const;
  /// Child operands (0, 1 or 2 of them).
  int arity() const;
  const Expr& lhs() const;
  const Expr& rhs() const;

  double evaluate(std::span<const double> x, std::span<const double> y) const;

  /// Exact symbolic partial derivative.
  Expr derivative(VarId v) const;

  bool depends_on(VarKind kind) const;
  /// Largest referenced index of the given kind, or -1 if none.
  int max_index(VarKind kind) const;
  bool contains_abs() const;
  std::size_t node_count() const;

  /// Infix text accepted back by the problem-file parser.
  std::string to_string() const;

  /// Structural equality (constants compared bitwise).
  bool equals(const Expr& other) const;

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node);
  static Expr make(Op op, double value, VarId var, const Expr* a, const Expr* b);

  std::shared_ptr<const Node> node_;
};

/// Name used in text form for a unary function op ("sin", ...).
const char* function_name(Expr::Op op);

/// Shortest round-trip decimal text of a double.
std::string format_number(double value);

}  // namespace mmx
