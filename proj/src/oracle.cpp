#include "minimax/oracle.hpp"

#include <cmath>
#include <span>

namespace mmx {

FdResult fd_derivatives(const std::function<double(const Vector&)>& field, const Vector& point, double step,
                        double hess_step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd_derivatives: step must be positive");
  const double hh = hess_step > 0.0 ? hess_step : step;
  const int n = static_cast<int>(point.size());
  FdResult r;
  r.gradient = Vector(n);
  r.hessian = Matrix(n, n);
  const double f0 = field(point);
  auto at = [&](int i, double si, int j, double sj) {
    Vector p = point;
    p(i) += si;
    if (j >= 0) p(j) += sj;
    return field(p);
  };
  for (int i = 0; i < n; ++i) {
    r.gradient(i) = (at(i, step, -1, 0) - at(i, -step, -1, 0)) / (2.0 * step);
    r.hessian(i, i) = (at(i, hh, -1, 0) - 2.0 * f0 + at(i, -hh, -1, 0)) / (hh * hh);
    for (int j = 0; j < i; ++j) {
      const double v = (at(i, hh, j, hh) - at(i, hh, j, -hh) - at(i, -hh, j, hh) + at(i, -hh, j, -hh)) / (4.0 * hh * hh);
      r.hessian(i, j) = v;
      r.hessian(j, i) = v;
    }
  }
  return r;
}

namespace {

std::span<const double> view(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

// Calls fn(offset) for every integer offset vector with |k|*step inside the
// ball of the radius.
template <class Fn>
void for_each_grid_point(int dim, double radius, double step, Fn&& fn) {
  const long half = static_cast<long>(std::floor(radius / step + 1e-9));
  std::vector<long> k(static_cast<std::size_t>(dim), -half);
  Vector offset(dim);
  const double r2 = radius * radius * (1.0 + 1e-12);
  for (;;) {
    double norm2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      offset(i) = static_cast<double>(k[static_cast<std::size_t>(i)]) * step;
      norm2 += offset(i) * offset(i);
    }
    if (norm2 <= r2) fn(offset);
    int i = 0;
    while (i < dim && ++k[static_cast<std::size_t>(i)] > half) k[static_cast<std::size_t>(i++)] = -half;
    if (i == dim) break;
  }
}

bool inner_feasible(const ProblemSpec& spec, const Vector& x, const Vector& y, double tol) {
  for (const Expr& e : spec.h()) {
    if (!(std::fabs(e.evaluate(view(x), view(y))) <= tol)) return false;
  }
  for (const Expr& e : spec.g()) {
    if (!(e.evaluate(view(x), view(y)) <= tol)) return false;
  }
  return true;
}

bool outer_feasible(const ProblemSpec& spec, const Vector& x, double tol) {
  const Vector none(0);
  for (const Expr& e : spec.H()) {
    if (!(std::fabs(e.evaluate(view(x), view(none))) <= tol)) return false;
  }
  for (const Expr& e : spec.G()) {
    if (!(e.evaluate(view(x), view(none)) <= tol)) return false;
  }
  return true;
}

// Returns -inf when nothing is feasible.
GridMax scan(const ProblemSpec& spec, const Vector& x, const Vector& center, double radius, double step, double tol) {
  GridMax best;
  best.value = -kInf;
  for_each_grid_point(static_cast<int>(center.size()), radius, step, [&](const Vector& off) {
    const Vector y = center + off;
    ++best.evaluated;
    try {
      if (!inner_feasible(spec, x, y, tol)) return;
      const double v = spec.f().evaluate(view(x), view(y));
      if (!std::isfinite(v)) return;
      ++best.feasible;
      if (v > best.value) {
        best.value = v;
        best.y = y;
      }
    } catch (const DomainError&) {
    }
  });
  return best;
}

}  // namespace

GridMax grid_local_maximize(const ProblemSpec& spec, const Vector& x, const Vector& center, double radius, double step,
                            double tol) {
  if (!(radius > 0.0) || !(step > 0.0)) throw std::invalid_argument("grid_local_maximize: radius and step must be positive");
  if (center.size() != spec.dims().m || x.size() != spec.dims().n) {
    throw std::invalid_argument("grid_local_maximize: dimension mismatch");
  }
  GridMax best = scan(spec, x, center, radius, step, tol);
  if (best.feasible == 0) throw EmptyGridError("no feasible grid point in Y(x)");
  return best;
}

GridMax grid_local_maximize_points(const ProblemSpec& spec, const Vector& x, const Vector& center, double radius,
                                   int points, double tol) {
  if (points < 3) throw std::invalid_argument("grid_local_maximize: need at least 3 points per axis");
  return grid_local_maximize(spec, x, center, radius, 2.0 * radius / (points - 1), tol);
}

DefinitionCheck verify_minimax_definition(const ProblemSpec& spec, const Vector& x_star, const Vector& y_star,
                                          const GridSpec& grid) {
  const Dimensions& d = spec.dims();
  if (d.n > 2 || d.m > 2) throw std::invalid_argument("definition oracle supports n <= 2 and m <= 2 only");
  if (!(grid.radius > 0.0) || !(grid.step > 0.0) || !(grid.eta > 0.0) || grid.levels < 1) {
    throw std::invalid_argument("definition oracle: invalid grid");
  }
  if (!outer_feasible(spec, x_star, grid.tol) || !inner_feasible(spec, x_star, y_star, grid.tol)) {
    throw std::invalid_argument("definition oracle: candidate is infeasible");
  }
  // Coarsen until the largest level fits the evaluation budget.
  double step = grid.step;
  auto cost = [&](double h) {
    const double px = std::pow(2.0 * grid.radius / h + 1.0, d.n);
    const double pz = std::pow(2.0 * grid.eta * grid.radius / h + 1.0, d.m);
    return px * pz * grid.levels;
  };
  while (cost(step) > static_cast<double>(grid.max_evaluations)) step *= 2.0;

  DefinitionCheck out;
  out.effective_step = step;
  const double f_star = spec.f().evaluate(view(x_star), view(y_star));
  auto record = [&](double excess, const char* side, const Vector& x, const Vector& y, double delta) {
    if (excess > grid.tol) out.pass = false;
    if (excess > out.worst_violation) {
      out.worst_violation = excess;
      out.side = side;
      out.witness_x = x;
      out.witness_y = y;
      out.delta = delta;
    }
  };
  double delta = grid.radius;
  for (int level = 0; level < grid.levels; ++level, delta *= 0.5) {
    for_each_grid_point(d.m, delta, step, [&](const Vector& off) {
      const Vector y = y_star + off;
      ++out.evaluations;
      try {
        if (!inner_feasible(spec, x_star, y, grid.tol)) return;
        record(spec.f().evaluate(view(x_star), view(y)) - f_star, "left", x_star, y, delta);
      } catch (const DomainError&) {
      }
    });
    for_each_grid_point(d.n, delta, step, [&](const Vector& off) {
      const Vector x = x_star + off;
      try {
        if (!outer_feasible(spec, x, grid.tol)) return;
      } catch (const DomainError&) {
        return;
      }
      const GridMax inner = scan(spec, x, y_star, grid.eta * delta, step, grid.tol);
      out.evaluations += inner.evaluated;
      if (inner.feasible == 0) {
        ++out.empty_inner;
        return;
      }
      record(f_star - inner.value, "right", x, inner.y, delta);
    });
  }
  return out;
}

}  // namespace mmx
