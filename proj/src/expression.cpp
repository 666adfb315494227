#include "minimax/expression.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>

namespace mmx {

struct Expr::Node {
  Op op = Op::Const;
  double value = 0.0;
  VarId var{};
  std::array<Expr, 2> children{Expr(nullptr), Expr(nullptr)};
};

namespace {

bool finite(double v) { return std::isfinite(v); }

bool is_unary_function(Expr::Op op) {
  switch (op) {
    case Expr::Op::Neg:
    case Expr::Op::Sin:
    case Expr::Op::Cos:
    case Expr::Op::Exp:
    case Expr::Op::Log:
    case Expr::Op::Sqrt:
    case Expr::Op::Abs:
    case Expr::Op::Sign:
      return true;
    default:
      return false;
  }
}

// Binding strength used by to_string: higher binds tighter.
int precedence(const Expr& e) {
  switch (e.op()) {
    case Expr::Op::Add:
    case Expr::Op::Sub:
      return 1;
    case Expr::Op::Mul:
    case Expr::Op::Div:
      return 2;
    case Expr::Op::Neg:
      return 3;
    case Expr::Op::Pow:
      return 4;
    case Expr::Op::Const:
      return std::signbit(e.constant_value()) ? 3 : 5;
    default:
      return 5;
  }
}

bool is_integer(double v) { return std::floor(v) == v; }

}  // namespace

const char* function_name(Expr::Op op) {
  switch (op) {
    case Expr::Op::Sin:
      return "sin";
    case Expr::Op::Cos:
      return "cos";
    case Expr::Op::Exp:
      return "exp";
    case Expr::Op::Log:
      return "log";
    case Expr::Op::Sqrt:
      return "sqrt";
    case Expr::Op::Abs:
      return "abs";
    case Expr::Op::Sign:
      return "sign";
    default:
      return "?";
  }
}

std::string format_number(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), end);
}

Expr::Expr() : Expr(constant(0.0)) {}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::make(Op op, double value, VarId var, const Expr* a, const Expr* b) {
  auto node = std::make_shared<Node>();
  node->op = op;
  node->value = value;
  node->var = var;
  if (a) node->children[0] = *a;
  if (b) node->children[1] = *b;
  return Expr(std::move(node));
}

Expr Expr::constant(double value) {
  if (value == 0.0) value = 0.0;  // fold -0 into +0
  return make(Op::Const, value, {}, nullptr, nullptr);
}

Expr Expr::variable(VarId id) {
  if (id.index < 0) throw std::invalid_argument("negative variable index");
  return make(Op::Var, 0.0, id, nullptr, nullptr);
}

Expr::Op Expr::op() const { return node_->op; }
bool Expr::is_constant(double value) const { return is_constant() && node_->value == value; }
double Expr::constant_value() const { return node_->value; }
VarId Expr::var() const { return node_->var; }

int Expr::arity() const {
  if (op() == Op::Const || op() == Op::Var) return 0;
  return is_unary_function(op()) ? 1 : 2;
}

const Expr& Expr::lhs() const { return node_->children[0]; }
const Expr& Expr::rhs() const { return node_->children[1]; }

Expr Expr::apply(Op fn, const Expr& arg) {
  if (!is_unary_function(fn)) throw std::invalid_argument("not a unary function");
  if (arg.is_constant()) {
    const double a = arg.constant_value();
    double r = NAN;
    switch (fn) {
      case Op::Neg: r = -a; break;
      case Op::Sin: r = std::sin(a); break;
      case Op::Cos: r = std::cos(a); break;
      case Op::Exp: r = std::exp(a); break;
      case Op::Log: r = a > 0 ? std::log(a) : NAN; break;
      case Op::Sqrt: r = a >= 0 ? std::sqrt(a) : NAN; break;
      case Op::Abs: r = std::fabs(a); break;
      case Op::Sign: r = a != 0 ? (a > 0 ? 1.0 : -1.0) : NAN; break;
      default: break;
    }
    // Out-of-domain constants stay symbolic so evaluation reports them.
    if (finite(r)) return constant(r);
  }
  if (fn == Op::Neg && arg.op() == Op::Neg) return arg.lhs();
  return make(fn, 0.0, {}, &arg, nullptr);
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.constant_value() + b.constant_value());
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return Expr::make(Expr::Op::Add, 0.0, {}, &a, &b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.constant_value() - b.constant_value());
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  return Expr::make(Expr::Op::Sub, 0.0, {}, &a, &b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.constant_value() * b.constant_value());
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return -b;
  if (b.is_constant(-1.0)) return -a;
  return Expr::make(Expr::Op::Mul, 0.0, {}, &a, &b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.constant_value() != 0.0) {
    return Expr::constant(a.constant_value() / b.constant_value());
  }
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expr::constant(0.0);
  return Expr::make(Expr::Op::Div, 0.0, {}, &a, &b);
}

Expr operator-(const Expr& a) { return Expr::apply(Expr::Op::Neg, a); }

Expr Expr::pow(const Expr& base, const Expr& exponent) {
  if (exponent.is_constant(1.0)) return base;
  if (exponent.is_constant(0.0)) return constant(1.0);
  if (base.is_constant() && exponent.is_constant()) {
    const double r = std::pow(base.constant_value(), exponent.constant_value());
    if (finite(r)) return constant(r);
  }
  return make(Op::Pow, 0.0, {}, &base, &exponent);
}

double Expr::evaluate(std::span<const double> x, std::span<const double> y) const {
  const Node& n = *node_;
  switch (n.op) {
    case Op::Const:
      return n.value;
    case Op::Var: {
      const auto vals = n.var.kind == VarKind::X ? x : y;
      if (static_cast<std::size_t>(n.var.index) >= vals.size()) {
        throw DomainError("variable index out of range", to_string());
      }
      return vals[static_cast<std::size_t>(n.var.index)];
    }
    case Op::Add:
      return lhs().evaluate(x, y) + rhs().evaluate(x, y);
    case Op::Sub:
      return lhs().evaluate(x, y) - rhs().evaluate(x, y);
    case Op::Mul:
      return lhs().evaluate(x, y) * rhs().evaluate(x, y);
    case Op::Div: {
      const double d = rhs().evaluate(x, y);
      if (d == 0.0) throw DomainError("division by zero", to_string());
      return lhs().evaluate(x, y) / d;
    }
    case Op::Pow: {
      const double b = lhs().evaluate(x, y);
      const double e = rhs().evaluate(x, y);
      if (b < 0.0 && !is_integer(e)) throw DomainError("negative base with non-integer exponent", to_string());
      if (b == 0.0 && e < 0.0) throw DomainError("zero raised to a negative power", to_string());
      return std::pow(b, e);
    }
    case Op::Neg:
      return -lhs().evaluate(x, y);
    case Op::Sin:
      return std::sin(lhs().evaluate(x, y));
    case Op::Cos:
      return std::cos(lhs().evaluate(x, y));
    case Op::Exp:
      return std::exp(lhs().evaluate(x, y));
    case Op::Log: {
      const double a = lhs().evaluate(x, y);
      if (!(a > 0.0)) throw DomainError("log of nonpositive argument", to_string());
      return std::log(a);
    }
    case Op::Sqrt: {
      const double a = lhs().evaluate(x, y);
      if (a < 0.0) throw DomainError("sqrt of negative argument", to_string());
      return std::sqrt(a);
    }
    case Op::Abs:
      return std::fabs(lhs().evaluate(x, y));
    case Op::Sign: {
      const double a = lhs().evaluate(x, y);
      if (a == 0.0) throw DomainError("abs is not differentiable at 0", to_string());
      return a > 0.0 ? 1.0 : -1.0;
    }
  }
  throw std::logic_error("unknown expression node");
}

Expr Expr::derivative(VarId v) const {
  const Node& n = *node_;
  switch (n.op) {
    case Op::Const:
      return constant(0.0);
    case Op::Var:
      return constant(n.var == v ? 1.0 : 0.0);
    case Op::Add:
      return lhs().derivative(v) + rhs().derivative(v);
    case Op::Sub:
      return lhs().derivative(v) - rhs().derivative(v);
    case Op::Mul:
      return lhs().derivative(v) * rhs() + lhs() * rhs().derivative(v);
    case Op::Div: {
      const Expr da = lhs().derivative(v);
      const Expr db = rhs().derivative(v);
      return da / rhs() - lhs() * db / pow(rhs(), constant(2.0));
    }
    case Op::Pow: {
      const Expr& a = lhs();
      const Expr& b = rhs();
      const Expr da = a.derivative(v);
      const Expr db = b.derivative(v);
      if (b.is_constant()) {
        return b * pow(a, constant(b.constant_value() - 1.0)) * da;
      }
      if (db.is_constant(0.0)) {
        return b * pow(a, b - constant(1.0)) * da;
      }
      return *this * (db * apply(Op::Log, a) + b * da / a);
    }
    case Op::Neg:
      return -lhs().derivative(v);
    case Op::Sin:
      return apply(Op::Cos, lhs()) * lhs().derivative(v);
    case Op::Cos:
      return -(apply(Op::Sin, lhs()) * lhs().derivative(v));
    case Op::Exp:
      return *this * lhs().derivative(v);
    case Op::Log:
      return lhs().derivative(v) / lhs();
    case Op::Sqrt:
      return lhs().derivative(v) / (constant(2.0) * *this);
    case Op::Abs:
      return apply(Op::Sign, lhs()) * lhs().derivative(v);
    case Op::Sign:
      return constant(0.0);
  }
  throw std::logic_error("unknown expression node");
}

bool Expr::depends_on(VarKind kind) const { return max_index(kind) >= 0; }

int Expr::max_index(VarKind kind) const {
  if (op() == Op::Var) return var().kind == kind ? var().index : -1;
  int best = -1;
  for (int i = 0; i < arity(); ++i) best = std::max(best, node_->children[i].max_index(kind));
  return best;
}

bool Expr::contains_abs() const {
  if (op() == Op::Abs || op() == Op::Sign) return true;
  for (int i = 0; i < arity(); ++i) {
    if (node_->children[i].contains_abs()) return true;
  }
  return false;
}

std::size_t Expr::node_count() const {
  std::size_t count = 1;
  for (int i = 0; i < arity(); ++i) count += node_->children[i].node_count();
  return count;
}

std::string Expr::to_string() const {
  auto wrap = [](const Expr& e, int min_prec) {
    std::string s = e.to_string();
    return precedence(e) < min_prec ? "(" + s + ")" : s;
  };
  const Node& n = *node_;
  switch (n.op) {
    case Op::Const:
      return format_number(n.value);
    case Op::Var:
      return std::string(n.var.kind == VarKind::X ? "x" : "y") + std::to_string(n.var.index + 1);
    case Op::Add:
      return wrap(lhs(), 1) + " + " + wrap(rhs(), 2);
    case Op::Sub:
      return wrap(lhs(), 1) + " - " + wrap(rhs(), 2);
    case Op::Mul:
      return wrap(lhs(), 2) + "*" + wrap(rhs(), 3);
    case Op::Div:
      return wrap(lhs(), 2) + "/" + wrap(rhs(), 3);
    case Op::Pow:
      return wrap(lhs(), 5) + "^" + wrap(rhs(), 3);
    case Op::Neg:
      return "-" + wrap(lhs(), 3);
    default:
      return std::string(function_name(n.op)) + "(" + lhs().to_string() + ")";
  }
}

bool Expr::equals(const Expr& other) const {
  if (node_ == other.node_) return true;
  const Node& a = *node_;
  const Node& b = *other.node_;
  if (a.op != b.op) return false;
  if (a.op == Op::Const) return std::bit_cast<std::uint64_t>(a.value) == std::bit_cast<std::uint64_t>(b.value);
  if (a.op == Op::Var) return a.var == b.var;
  for (int i = 0; i < arity(); ++i) {
    if (!a.children[i].equals(b.children[i])) return false;
  }
  return true;
}

}  // namespace mmx
