#pragma once
// Brute-force reference solvers. Test-only; they share no code path with the
// simplex or branch-and-bound.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "recover/model.hpp"

namespace oracle {

inline double dot(const recover::LinExpr& e, const std::vector<double>& x) {
  double s = e.constant();
  for (const auto& t : e.terms()) s += t.coefficient * x[t.var.index];
  return s;
}

inline bool satisfies(const recover::Model& model, const std::vector<double>& x, double tol) {
  for (const auto& c : model.constraints()) {
    const double lhs = dot(c.expr, x);
    switch (c.sense) {
      case recover::Sense::LessEqual:
        if (lhs > c.rhs + tol) return false;
        break;
      case recover::Sense::GreaterEqual:
        if (lhs < c.rhs - tol) return false;
        break;
      case recover::Sense::Equal:
        if (std::abs(lhs - c.rhs) > tol) return false;
        break;
    }
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto& v = model.variables()[j];
    if (x[j] < v.lower - tol || x[j] > v.upper + tol) return false;
  }
  return true;
}

// Exhaustive 2^n search; every variable must be binary.
inline std::optional<double> enumerate_binary(const recover::Model& model) {
  const std::size_t n = model.num_variables();
  std::optional<double> best;
  std::vector<double> x(n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (std::size_t j = 0; j < n; ++j) x[j] = (mask >> j) & 1u ? 1.0 : 0.0;
    if (!satisfies(model, x, 1e-9)) continue;
    const double obj = dot(model.objective(), x);
    if (!best || obj < *best) best = obj;
  }
  return best;
}

// Solves a small dense square system by Gaussian elimination; nullopt if singular.
inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    }
    if (std::abs(a[p][c]) < 1e-10) return std::nullopt;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

// Minimum over all vertices of a bounded polyhedron: every choice of n active
// hyperplanes among constraints and finite variable bounds.
inline std::optional<double> enumerate_vertices(const recover::Model& model) {
  const std::size_t n = model.num_variables();
  std::vector<std::vector<double>> planes;
  std::vector<double> rhs;
  for (const auto& c : model.constraints()) {
    std::vector<double> row(n, 0.0);
    for (const auto& t : c.expr.terms()) row[t.var.index] = t.coefficient;
    planes.push_back(row);
    rhs.push_back(c.rhs - c.expr.constant());
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> row(n, 0.0);
    row[j] = 1.0;
    planes.push_back(row);
    rhs.push_back(model.variables()[j].lower);
    planes.push_back(row);
    rhs.push_back(model.variables()[j].upper);
  }
  std::optional<double> best;
  std::vector<std::size_t> pick;
  std::function<void(std::size_t)> recurse = [&](std::size_t from) {
    if (pick.size() == n) {
      std::vector<std::vector<double>> a;
      std::vector<double> b;
      for (auto k : pick) {
        a.push_back(planes[k]);
        b.push_back(rhs[k]);
      }
      auto x = solve_square(a, b);
      if (!x || !satisfies(model, *x, 1e-7)) return;
      const double obj = dot(model.objective(), *x);
      if (!best || obj < *best) best = obj;
      return;
    }
    for (std::size_t k = from; k < planes.size(); ++k) {
      pick.push_back(k);
      recurse(k + 1);
      pick.pop_back();
    }
  };
  recurse(0);
  return best;
}

}  // namespace oracle
