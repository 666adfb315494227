#include "minimax/problem.hpp"

#include <cctype>
#include <cmath>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <map>
#include <sstream>

namespace mmx {

// ---------------------------------------------------------------------------
// Derivative tables

struct ProblemSpec::Tables {
  struct Compiled {
    Expr value;
    int vars = 0;             // n + m for lower functions, n for upper ones
    std::vector<Expr> grad;   // x-variables first, then y-variables
    std::vector<Expr> hess;   // packed upper triangle, row-major
  };
  int n = 0;
  int m = 0;
  Compiled f;
  std::vector<Compiled> h, g, H, G;
};

namespace {

VarId var_at(int k, int n) { return k < n ? VarId{VarKind::X, k} : VarId{VarKind::Y, k - n}; }

ProblemSpec::Tables::Compiled compile(const Expr& e, int n, int vars) {
  ProblemSpec::Tables::Compiled c;
  c.value = e;
  c.vars = vars;
  c.grad.reserve(static_cast<std::size_t>(vars));
  for (int i = 0; i < vars; ++i) c.grad.push_back(e.derivative(var_at(i, n)));
  for (int i = 0; i < vars; ++i) {
    for (int j = i; j < vars; ++j) c.hess.push_back(c.grad[static_cast<std::size_t>(i)].derivative(var_at(j, n)));
  }
  return c;
}

FunctionDerivatives evaluate(const ProblemSpec::Tables::Compiled& c, int n, int m, std::span<const double> x,
                             std::span<const double> y, const std::string& name) {
  FunctionDerivatives out;
  const int vars = c.vars;
  Vector grad(vars);
  Matrix hess(vars, vars);
  try {
    out.value = c.value.evaluate(x, y);
    for (int i = 0; i < vars; ++i) grad(i) = c.grad[static_cast<std::size_t>(i)].evaluate(x, y);
    std::size_t k = 0;
    for (int i = 0; i < vars; ++i) {
      for (int j = i; j < vars; ++j) {
        hess(i, j) = c.hess[k++].evaluate(x, y);
        hess(j, i) = hess(i, j);
      }
    }
  } catch (const DomainError& e) {
    throw DomainError(name + ": " + e.what(), e.expression());
  }
  const int my = vars - n;
  out.dx = grad.head(n);
  out.dy = grad.tail(my);
  out.dxx = hess.topLeftCorner(n, n);
  out.dxy = hess.topRightCorner(n, my);
  out.dyy = hess.bottomRightCorner(my, my);
  (void)m;
  return out;
}

void check_vars(const Expr& e, const std::string& name, const Dimensions& d, bool upper) {
  if (e.max_index(VarKind::X) >= d.n) {
    throw SpecError(name + " references x" + std::to_string(e.max_index(VarKind::X) + 1) + " but n = " +
                    std::to_string(d.n));
  }
  if (upper && e.depends_on(VarKind::Y)) throw SpecError(name + " must not reference y-variables");
  if (e.max_index(VarKind::Y) >= d.m) {
    throw SpecError(name + " references y" + std::to_string(e.max_index(VarKind::Y) + 1) + " but m = " +
                    std::to_string(d.m));
  }
}

}  // namespace

ProblemSpec::ProblemSpec(Dimensions dims, Expr f, std::vector<Expr> h, std::vector<Expr> g,
                         std::vector<Expr> H, std::vector<Expr> G)
    : dims_(dims), f_(std::move(f)), h_(std::move(h)), g_(std::move(g)), H_(std::move(H)), G_(std::move(G)) {
  const Dimensions& d = dims_;
  if (d.n < 0 || d.m < 0 || d.m1 < 0 || d.m2 < 0 || d.n1 < 0 || d.n2 < 0) {
    throw SpecError("dimensions must be nonnegative");
  }
  auto check_count = [](const std::vector<Expr>& list, int expected, const char* name) {
    if (static_cast<int>(list.size()) != expected) {
      throw SpecError(std::string("expected ") + std::to_string(expected) + " " + name + " expressions, got " +
                      std::to_string(list.size()));
    }
  };
  check_count(h_, d.m1, "h");
  check_count(g_, d.m2, "g");
  check_count(H_, d.n1, "H");
  check_count(G_, d.n2, "G");
  check_vars(f_, "f", d, false);
  for (std::size_t i = 0; i < h_.size(); ++i) check_vars(h_[i], "h" + std::to_string(i + 1), d, false);
  for (std::size_t i = 0; i < g_.size(); ++i) check_vars(g_[i], "g" + std::to_string(i + 1), d, false);
  for (std::size_t i = 0; i < H_.size(); ++i) check_vars(H_[i], "H" + std::to_string(i + 1), d, true);
  for (std::size_t i = 0; i < G_.size(); ++i) check_vars(G_[i], "G" + std::to_string(i + 1), d, true);

  auto tables = std::make_shared<Tables>();
  tables->n = d.n;
  tables->m = d.m;
  tables->f = compile(f_, d.n, d.n + d.m);
  for (const Expr& e : h_) tables->h.push_back(compile(e, d.n, d.n + d.m));
  for (const Expr& e : g_) tables->g.push_back(compile(e, d.n, d.n + d.m));
  for (const Expr& e : H_) tables->H.push_back(compile(e, d.n, d.n));
  for (const Expr& e : G_) tables->G.push_back(compile(e, d.n, d.n));
  tables_ = std::move(tables);
}

bool ProblemSpec::contains_abs() const {
  auto any = [](const std::vector<Expr>& list) {
    for (const Expr& e : list) {
      if (e.contains_abs()) return true;
    }
    return false;
  };
  return f_.contains_abs() || any(h_) || any(g_) || any(H_) || any(G_);
}

bool operator==(const ProblemSpec& a, const ProblemSpec& b) {
  auto same = [](const std::vector<Expr>& p, const std::vector<Expr>& q) {
    if (p.size() != q.size()) return false;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!p[i].equals(q[i])) return false;
    }
    return true;
  };
  return a.dims() == b.dims() && a.f().equals(b.f()) && same(a.h(), b.h()) && same(a.g(), b.g()) &&
         same(a.H(), b.H()) && same(a.G(), b.G());
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class ExpressionParser {
 public:
  ExpressionParser(std::string_view text, int line, int column_offset, int n, int m)
      : text_(text), line_(line), offset_(column_offset), n_(n), m_(m) {}

  Expr parse() {
    Expr e = parse_sum();
    skip_space();
    if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(line_, offset_ + static_cast<int>(pos_) + 1, message);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  // Accepts ASCII '-' and U+2212 (UTF-8 E2 88 92) as minus.
  bool match_minus() {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '-') {
      ++pos_;
      return true;
    }
    if (text_.substr(pos_, 3) == "\xE2\x88\x92") {
      pos_ += 3;
      return true;
    }
    return false;
  }

  bool match(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_sum() {
    Expr e = parse_product();
    for (;;) {
      if (match('+')) {
        e = e + parse_product();
      } else if (match_minus()) {
        e = e - parse_product();
      } else {
        return e;
      }
    }
  }

  Expr parse_product() {
    Expr e = parse_unary();
    for (;;) {
      if (match('*')) {
        e = e * parse_unary();
      } else if (match('/')) {
        e = e / parse_unary();
      } else {
        return e;
      }
    }
  }

  Expr parse_unary() {
    if (match_minus()) return -parse_unary();
    if (match('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (match('^')) return Expr::pow(base, parse_unary());
    return base;
  }

  Expr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      if (!match(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
      pos_ = start;
      fail("malformed number");
    }
    return Expr::constant(value);
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    static const std::map<std::string_view, Expr::Op> functions = {
        {"sin", Expr::Op::Sin}, {"cos", Expr::Op::Cos},   {"exp", Expr::Op::Exp},
        {"log", Expr::Op::Log}, {"sqrt", Expr::Op::Sqrt}, {"abs", Expr::Op::Abs},
    };
    if (auto it = functions.find(name); it != functions.end()) {
      if (!match('(')) fail("expected '(' after " + std::string(name));
      Expr arg = parse_sum();
      if (!match(')')) fail("expected ')'");
      return Expr::apply(it->second, arg);
    }
    if ((name[0] == 'x' || name[0] == 'y') && name.size() > 1) {
      int index = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (ec == std::errc{} && ptr == name.data() + name.size() && index >= 1) {
        const bool is_x = name[0] == 'x';
        const int limit = is_x ? n_ : m_;
        if (index > limit) {
          pos_ = start;
          fail("variable " + std::string(name) + " exceeds declared dimension " + std::to_string(limit));
        }
        return Expr::variable({is_x ? VarKind::X : VarKind::Y, index - 1});
      }
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_;
  int offset_;
  int n_;
  int m_;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Expr parse_expression(std::string_view text, int n, int m) { return ExpressionParser(text, 1, 0, n, m).parse(); }

ProblemSpec parse_problem(std::string_view text) {
  std::optional<Dimensions> dims;
  std::optional<Expr> f;
  std::map<char, std::vector<std::optional<Expr>>> lists;
  int dims_line = 0;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    const std::string_view line = trim(raw);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const int indent = static_cast<int>(line.data() - raw.data());

    if (!dims) {
      std::istringstream in{std::string(line)};
      std::string keyword;
      Dimensions d;
      in >> keyword;
      if (keyword != "dims") throw ParseError(line_no, indent + 1, "expected 'dims n m m1 m2 n1 n2'");
      if (!(in >> d.n >> d.m >> d.m1 >> d.m2 >> d.n1 >> d.n2)) {
        throw ParseError(line_no, indent + 1, "dims needs six nonnegative integers");
      }
      std::string extra;
      if (in >> extra) throw ParseError(line_no, indent + 1, "trailing text after dims");
      if (d.n < 0 || d.m < 0 || d.m1 < 0 || d.m2 < 0 || d.n1 < 0 || d.n2 < 0) {
        throw ParseError(line_no, indent + 1, "dimensions must be nonnegative");
      }
      dims = d;
      dims_line = line_no;
      lists['h'].resize(static_cast<std::size_t>(d.m1));
      lists['g'].resize(static_cast<std::size_t>(d.m2));
      lists['H'].resize(static_cast<std::size_t>(d.n1));
      lists['G'].resize(static_cast<std::size_t>(d.n2));
      if (end == text.size()) break;
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, indent + 1, "expected '<name> = <expr>'");
    const std::string_view lhs = trim(line.substr(0, eq));
    const std::string_view rhs_raw = line.substr(eq + 1);
    const int rhs_col = indent + static_cast<int>(eq) + 1;
    if (lhs.empty()) throw ParseError(line_no, indent + 1, "missing assignment target");

    const Dimensions& d = *dims;
    if (lhs == "f") {
      if (f) throw ParseError(line_no, indent + 1, "f assigned twice");
      f = ExpressionParser(rhs_raw, line_no, rhs_col, d.n, d.m).parse();
      if (end == text.size()) break;
      continue;
    }
    const char kind = lhs[0];
    if (!lists.contains(kind) || lhs.size() < 2) {
      throw ParseError(line_no, indent + 1, "unknown assignment target '" + std::string(lhs) + "'");
    }
    int index = 0;
    auto [ptr, ec] = std::from_chars(lhs.data() + 1, lhs.data() + lhs.size(), index);
    if (ec != std::errc{} || ptr != lhs.data() + lhs.size()) {
      throw ParseError(line_no, indent + 1, "malformed target '" + std::string(lhs) + "'");
    }
    auto& slots = lists[kind];
    if (index < 1 || index > static_cast<int>(slots.size())) {
      throw ParseError(line_no, indent + 1,
                       "dimension mismatch: " + std::string(lhs) + " outside declared count " +
                           std::to_string(slots.size()));
    }
    auto& slot = slots[static_cast<std::size_t>(index - 1)];
    if (slot) throw ParseError(line_no, indent + 1, std::string(lhs) + " assigned twice");
    const bool upper = kind == 'H' || kind == 'G';
    Expr e = ExpressionParser(rhs_raw, line_no, rhs_col, d.n, d.m).parse();
    if (upper && e.depends_on(VarKind::Y)) {
      const std::size_t ypos = rhs_raw.find('y');
      throw ParseError(line_no, rhs_col + static_cast<int>(ypos == std::string_view::npos ? 0 : ypos) + 1,
                       "y-variable in upper constraint " + std::string(lhs));
    }
    slot = std::move(e);
    if (end == text.size()) break;
  }

  if (!dims) throw ParseError(std::max(line_no, 1), 1, "missing dims line");
  if (!f) throw ParseError(dims_line, 1, "missing assignment for f");
  auto collect = [&](char kind) {
    std::vector<Expr> out;
    const auto& slots = lists[kind];
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (!slots[i]) {
        throw ParseError(dims_line, 1, "dimension mismatch: missing assignment for " + std::string(1, kind) +
                                           std::to_string(i + 1));
      }
      out.push_back(*slots[i]);
    }
    return out;
  };
  return ProblemSpec(*dims, *f, collect('h'), collect('g'), collect('H'), collect('G'));
}

std::string serialize_problem(const ProblemSpec& spec) {
  const Dimensions& d = spec.dims();
  std::ostringstream out;
  out << "dims " << d.n << ' ' << d.m << ' ' << d.m1 << ' ' << d.m2 << ' ' << d.n1 << ' ' << d.n2 << '\n';
  out << "f = " << spec.f().to_string() << '\n';
  auto emit = [&](const std::vector<Expr>& list, char name) {
    for (std::size_t i = 0; i < list.size(); ++i) out << name << i + 1 << " = " << list[i].to_string() << '\n';
  };
  emit(spec.h(), 'h');
  emit(spec.g(), 'g');
  emit(spec.H(), 'H');
  emit(spec.G(), 'G');
  return out.str();
}

std::string problem_digest(const ProblemSpec& spec) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char c : serialize_problem(spec)) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

// ---------------------------------------------------------------------------
// Evaluation

DerivativeBundle eval_bundle(const ProblemSpec& spec, const Vector& x, const Vector& y) {
  const Dimensions& d = spec.dims();
  if (x.size() != d.n || y.size() != d.m) throw SpecError("eval_bundle: point dimension mismatch");
  const auto& t = spec.tables();
  const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
  const std::span<const double> ys(y.data(), static_cast<std::size_t>(y.size()));
  DerivativeBundle b;
  b.x = x;
  b.y = y;
  b.f = evaluate(t.f, d.n, d.m, xs, ys, "f");
  auto eval_list = [&](const std::vector<ProblemSpec::Tables::Compiled>& list, char name) {
    std::vector<FunctionDerivatives> out;
    for (std::size_t i = 0; i < list.size(); ++i) {
      out.push_back(evaluate(list[i], d.n, d.m, xs, ys, std::string(1, name) + std::to_string(i + 1)));
    }
    return out;
  };
  b.h = eval_list(t.h, 'h');
  b.g = eval_list(t.g, 'g');
  b.H = eval_list(t.H, 'H');
  b.G = eval_list(t.G, 'G');
  auto check = [](const FunctionDerivatives& fd, const std::string& name) {
    const bool ok = std::isfinite(fd.value) && fd.dx.allFinite() && fd.dy.allFinite() && fd.dxx.allFinite() &&
                    fd.dxy.allFinite() && fd.dyy.allFinite();
    if (!ok) throw DomainError(name + ": non-finite value or derivative", name);
  };
  check(b.f, "f");
  for (std::size_t i = 0; i < b.h.size(); ++i) check(b.h[i], "h" + std::to_string(i + 1));
  for (std::size_t i = 0; i < b.g.size(); ++i) check(b.g[i], "g" + std::to_string(i + 1));
  for (std::size_t i = 0; i < b.H.size(); ++i) check(b.H[i], "H" + std::to_string(i + 1));
  for (std::size_t i = 0; i < b.G.size(); ++i) check(b.G[i], "G" + std::to_string(i + 1));
  return b;
}

DerivativeBundle eval_upper_bundle(const ProblemSpec& spec, const Vector& x) {
  const Dimensions& d = spec.dims();
  if (x.size() != d.n) throw SpecError("eval_upper_bundle: point dimension mismatch");
  const auto& t = spec.tables();
  const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
  DerivativeBundle b;
  b.x = x;
  b.y = Vector(0);
  auto eval_list = [&](const std::vector<ProblemSpec::Tables::Compiled>& list, char name) {
    std::vector<FunctionDerivatives> out;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string label = std::string(1, name) + std::to_string(i + 1);
      out.push_back(evaluate(list[i], d.n, 0, xs, {}, label));
      const FunctionDerivatives& fd = out.back();
      if (!std::isfinite(fd.value) || !fd.dx.allFinite() || !fd.dxx.allFinite()) {
        throw DomainError(label + ": non-finite value or derivative", label);
      }
    }
    return out;
  };
  b.H = eval_list(t.H, 'H');
  b.G = eval_list(t.G, 'G');
  return b;
}

namespace {

Vector values_of(const std::vector<FunctionDerivatives>& list) {
  Vector v(static_cast<Eigen::Index>(list.size()));
  for (std::size_t i = 0; i < list.size(); ++i) v(static_cast<Eigen::Index>(i)) = list[i].value;
  return v;
}

Matrix rows_of(const std::vector<FunctionDerivatives>& list, bool x_part, Eigen::Index cols) {
  Matrix j(static_cast<Eigen::Index>(list.size()), cols);
  for (std::size_t i = 0; i < list.size(); ++i) {
    j.row(static_cast<Eigen::Index>(i)) = (x_part ? list[i].dx : list[i].dy).transpose();
  }
  return j;
}

}  // namespace

Vector DerivativeBundle::h_values() const { return values_of(h); }
Vector DerivativeBundle::g_values() const { return values_of(g); }
Vector DerivativeBundle::H_values() const { return values_of(H); }
Vector DerivativeBundle::G_values() const { return values_of(G); }
Matrix DerivativeBundle::h_jac_x() const { return rows_of(h, true, x.size()); }
Matrix DerivativeBundle::h_jac_y() const { return rows_of(h, false, y.size()); }
Matrix DerivativeBundle::g_jac_x() const { return rows_of(g, true, x.size()); }
Matrix DerivativeBundle::g_jac_y() const { return rows_of(g, false, y.size()); }
Matrix DerivativeBundle::H_jac() const { return rows_of(H, true, x.size()); }
Matrix DerivativeBundle::G_jac() const { return rows_of(G, true, x.size()); }

void validate_candidate(const ProblemSpec& spec, const CandidatePoint& c) {
  const Dimensions& d = spec.dims();
  auto check = [](const Vector& v, int expected, const char* name) {
    if (v.size() != expected) {
      throw SpecError(std::string("candidate ") + name + " has length " + std::to_string(v.size()) +
                      ", expected " + std::to_string(expected));
    }
    if (!v.allFinite()) throw SpecError(std::string("candidate ") + name + " has non-finite entries");
  };
  check(c.x, d.n, "x");
  check(c.y, d.m, "y");
  if (c.mu) check(*c.mu, d.m1, "mu");
  if (c.lambda) check(*c.lambda, d.m2, "lambda");
  if (c.u) check(*c.u, d.n1, "u");
  if (c.v) check(*c.v, d.n2, "v");
}

void require_smooth(const ProblemSpec& spec) {
  if (spec.contains_abs()) {
    throw SpecError("problem uses abs(); optimality checks require twice continuously differentiable functions");
  }
}

namespace fixtures {

const char* const kP1 =
    "dims 1 1 0 1 0 1\n"
    "f = x1*y1 - 0.5*y1^2\n"
    "g1 = y1 - 1\n"
    "G1 = x1 - 2\n";

const char* const kP2 =
    "dims 1 1 0 1 0 0\n"
    "f = -(y1 - x1)^2\n"
    "g1 = y1\n";

const char* const kP3 =
    "dims 1 1 0 0 0 2\n"
    "f = x1*y1 - 0.5*y1^2\n"
    "G1 = x1\n"
    "G2 = -x1\n";

const char* const kP4 =
    "dims 1 1 0 1 0 1\n"
    "f = x1*y1 - 0.5*y1^2\n"
    "g1 = y1 - 1\n"
    "G1 = 1 - x1\n";

const char* const kP1Flipped =
    "dims 1 1 0 1 0 0\n"
    "f = -x1^2 + x1*y1 - 0.5*y1^2\n"
    "g1 = y1 - 1\n";

ProblemSpec p1() { return parse_problem(kP1); }
ProblemSpec p2() { return parse_problem(kP2); }
ProblemSpec p3() { return parse_problem(kP3); }
ProblemSpec p4() { return parse_problem(kP4); }
ProblemSpec p1_flipped() { return parse_problem(kP1Flipped); }

}  // namespace fixtures

}  // namespace mmx
