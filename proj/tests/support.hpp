#pragma once

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "minimax/certifier.hpp"
#include "minimax/problem.hpp"

namespace testing {

using mmx::Matrix;
using mmx::Vector;

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<int>(v.size()));
  int i = 0;
  for (double d : v) out(i++) = d;
  return out;
}

inline mmx::CandidatePoint point(std::initializer_list<double> x, std::initializer_list<double> y) {
  mmx::CandidatePoint c;
  c.x = vec(x);
  c.y = vec(y);
  return c;
}

inline std::string num(double v) { return "(" + mmx::format_number(v) + ")"; }

// Central difference gradient, written independently of the oracle module.
template <class F>
Vector central_gradient(F&& f, const Vector& at, double h) {
  Vector g(at.size());
  for (int i = 0; i < at.size(); ++i) {
    Vector p = at, q = at;
    p(i) += h;
    q(i) -= h;
    g(i) = (f(p) - f(q)) / (2 * h);
  }
  return g;
}

template <class F>
Matrix central_hessian(F&& f, const Vector& at, double h) {
  const int n = static_cast<int>(at.size());
  Matrix out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      auto e = [&](double si, double sj) {
        Vector p = at;
        p(i) += si;
        p(j) += sj;
        return f(p);
      };
      out(i, j) = (e(h, h) - e(h, -h) - e(-h, h) + e(-h, -h)) / (4 * h * h);
    }
  }
  return out;
}

// Random polynomial of degree <= 4 in x1, x2, y1.
inline mmx::Expr random_polynomial(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_int_distribution<int> pick(0, 2);
  std::uniform_int_distribution<int> terms(1, 5);
  std::uniform_int_distribution<int> degree(0, 4);
  mmx::Expr p = mmx::Expr::constant(coef(rng));
  const int count = terms(rng);
  for (int t = 0; t < count; ++t) {
    mmx::Expr mono = mmx::Expr::constant(coef(rng));
    const int deg = degree(rng);
    for (int k = 0; k < deg; ++k) {
      const int v = pick(rng);
      mono = mono * (v == 2 ? mmx::Expr::y(0) : mmx::Expr::x(v));
    }
    p = p + mono;
  }
  if (rng() % 3 == 0) p = mmx::Expr::pow(p, mmx::Expr::constant(2.0)) - p;
  return p;
}


// A random smooth instance with a candidate at which the lower level is a
// strictly complementary, nondegenerate KKT point:
//   f = 1/2 y'Qy + y'Cx + 1/2 x'Rx + b'y,  Q negative definite,
//   g_i = a_i'y + c_i'x + s_i x1 y_i + q_i |y|^2 + e_i.
// Multipliers are fixed first and b, e solve for stationarity and activity.
struct RandomInstance {
  std::string text;
  Vector x, y, lambda;
  int active = 0;
};

inline RandomInstance random_instance(std::uint64_t seed, int n, int m, int m2) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto r = [&] { return std::round(unit(rng) * 1000.0) / 1000.0; };
  RandomInstance inst;
  inst.x = Vector(n);
  inst.y = Vector(m);
  for (int i = 0; i < n; ++i) inst.x(i) = 0.5 * r();
  for (int i = 0; i < m; ++i) inst.y(i) = 0.5 * r();

  Matrix B(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) B(i, j) = r();
  const Matrix Q = -(B * B.transpose() + Matrix::Identity(m, m));
  Matrix C(m, n), R(n, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) C(i, j) = r();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) R(i, j) = R(j, i) = r();

  Matrix A(m2, m), Cg(m2, n);
  Vector s(m2), q(m2), e(m2);
  inst.lambda = Vector::Zero(m2);
  for (int i = 0; i < m2; ++i) {
    for (int j = 0; j < m; ++j) A(i, j) = r();
    A(i, i % m) += 2.0;  // keeps active gradients independent
    for (int j = 0; j < n; ++j) Cg(i, j) = r();
    s(i) = 0.5 * r();
    q(i) = 0.1 * std::fabs(r());
  }
  // Activity: at most m constraints active, so LICQ can hold.
  std::vector<bool> active(static_cast<std::size_t>(m2), false);
  for (int i = 0; i < m2 && inst.active < m; ++i) {
    if (rng() % 2 == 0) {
      active[static_cast<std::size_t>(i)] = true;
      ++inst.active;
    }
  }
  Vector grad_g_sum = Vector::Zero(m);
  for (int i = 0; i < m2; ++i) {
    const double yi = inst.y(i % m);
    double base = A.row(i).dot(inst.y) + Cg.row(i).dot(inst.x) + s(i) * inst.x(0) * yi + q(i) * inst.y.squaredNorm();
    Vector grad = A.row(i).transpose() + 2.0 * q(i) * inst.y;
    grad(i % m) += s(i) * inst.x(0);
    if (active[static_cast<std::size_t>(i)]) {
      inst.lambda(i) = 0.5 + 0.5 * std::fabs(r());
      e(i) = -base;
      grad_g_sum += inst.lambda(i) * grad;
    } else {
      e(i) = -base - (0.5 + 0.5 * std::fabs(r()));
    }
  }
  // grad_y f - sum lambda_i grad_y g_i = 0 at the candidate.
  const Vector b = grad_g_sum - Q * inst.y - C * inst.x;

  std::ostringstream t;
  t << "dims " << n << " " << m << " 0 " << m2 << " 0 0\n";
  t << "f = 0";
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) t << " + 0.5*" << num(Q(i, j)) << "*y" << i + 1 << "*y" << j + 1;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) t << " + " << num(C(i, j)) << "*y" << i + 1 << "*x" << j + 1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t << " + 0.5*" << num(R(i, j)) << "*x" << i + 1 << "*x" << j + 1;
  for (int i = 0; i < m; ++i) t << " + " << num(b(i)) << "*y" << i + 1;
  t << "\n";
  for (int i = 0; i < m2; ++i) {
    t << "g" << i + 1 << " = " << num(e(i));
    for (int j = 0; j < m; ++j) t << " + " << num(A(i, j)) << "*y" << j + 1;
    for (int j = 0; j < n; ++j) t << " + " << num(Cg(i, j)) << "*x" << j + 1;
    t << " + " << num(s(i)) << "*x1*y" << (i % m) + 1;
    for (int j = 0; j < m; ++j) t << " + " << num(q(i)) << "*y" << j + 1 << "^2";
    t << "\n";
  }
  inst.text = t.str();
  return inst;
}

}  // namespace testing
