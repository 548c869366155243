#include <doctest.h>

#include <random>

#include "generators.hpp"
#include "oracles.hpp"
#include "recover/error.hpp"
#include "recover/solver.hpp"

using namespace recover;

TEST_CASE("solve_lp: minimize -x with x <= 4") {
  Model m;
  auto x = m.add_variable({"x", VarKind::Continuous, 0, 10, {}});
  m.add_constraint({"cap", LinExpr(x), Sense::LessEqual, 4, {}});
  m.set_objective(-1.0 * LinExpr(x));
  auto [sol, stats] = solve_lp(m);
  REQUIRE(sol.status == Status::Optimal);
  CHECK(sol.values[0] == doctest::Approx(4));
  CHECK(sol.objective_value == doctest::Approx(-4));
}

TEST_CASE("solve_lp: covering constraint") {
  Model m;
  auto x = m.add_variable({"x", VarKind::Continuous, 0, kInf, {}});
  auto y = m.add_variable({"y", VarKind::Continuous, 0, kInf, {}});
  m.add_constraint({"cover", LinExpr(x) + LinExpr(y), Sense::GreaterEqual, 3, {}});
  m.set_objective(LinExpr(x) + LinExpr(y));
  auto [sol, stats] = solve_lp(m);
  REQUIRE(sol.status == Status::Optimal);
  CHECK(sol.objective_value == doctest::Approx(3));
}

TEST_CASE("solve_lp matches vertex enumeration on random bounded LPs") {
  std::mt19937_64 rng(2024);
  int feasible = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto model = gen::random_bounded_lp(rng);
    auto expected = oracle::enumerate_vertices(model);
    auto [sol, stats] = solve_lp(model);
    if (!expected) {
      CHECK(sol.status == Status::Infeasible);
      continue;
    }
    ++feasible;
    REQUIRE(sol.status == Status::Optimal);
    CHECK(sol.objective_value == doctest::Approx(*expected).epsilon(1e-6).scale(1.0));
    CHECK(check_feasible(model, sol, 1e-7).empty());
  }
  CHECK(feasible > 10);
}

TEST_CASE("infeasibility and unboundedness certificates") {
  {
    Model m;
    auto x = m.add_variable({"x", VarKind::Continuous, -kInf, kInf, {}});
    m.add_constraint({"lo", LinExpr(x), Sense::GreaterEqual, 1, {}});
    m.add_constraint({"hi", LinExpr(x), Sense::LessEqual, 0, {}});
    CHECK(solve_lp(m).first.status == Status::Infeasible);
    CHECK(solve_milp(m).first.status == Status::Infeasible);
  }
  {
    Model m;
    auto x = m.add_variable({"x", VarKind::Continuous, 0, kInf, {}});
    m.set_objective(-1.0 * LinExpr(x));
    CHECK(solve_lp(m).first.status == Status::Unbounded);
    CHECK(solve_milp(m).first.status == Status::Unbounded);
  }
  {
    // free variable, equality
    Model m;
    auto x = m.add_variable({"x", VarKind::Continuous, -kInf, kInf, {}});
    auto y = m.add_variable({"y", VarKind::Continuous, -kInf, 3, {}});
    m.add_constraint({"eq", LinExpr(x) - LinExpr(y), Sense::Equal, -2, {}});
    m.set_objective(-1.0 * LinExpr(x));
    auto [sol, stats] = solve_lp(m);
    REQUIRE(sol.status == Status::Optimal);
    CHECK(sol.values[0] == doctest::Approx(1));
  }
}

TEST_CASE("integral LP optimum needs no branching") {
  Model m;
  auto x = m.add_variable({"x", VarKind::Integer, 0, 10, {}});
  auto y = m.add_variable({"y", VarKind::Binary, 0, 1, {}});
  m.add_constraint({"c", LinExpr(x) + LinExpr(y), Sense::LessEqual, 4, {}});
  m.set_objective(-1.0 * LinExpr(x) - 2.0 * LinExpr(y));
  auto [sol, stats] = solve_milp(m);
  REQUIRE(sol.status == Status::Optimal);
  CHECK(stats.nodes_explored == 1);
  CHECK(sol.objective_value == doctest::Approx(-5));
}

TEST_CASE("solve_milp matches 2^n enumeration") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 80; ++trial) {
    auto model = gen::random_binary_milp(rng);
    auto expected = oracle::enumerate_binary(model);
    auto [sol, stats] = solve_milp(model);
    if (!expected) {
      CHECK(sol.status == Status::Infeasible);
      continue;
    }
    REQUIRE(sol.status == Status::Optimal);
    CHECK(sol.objective_value == doctest::Approx(*expected).epsilon(1e-9).scale(1.0));
    CHECK(check_feasible(model, sol, SolveParams{}.feas_tol).empty());
    CHECK(stats.best_bound <= sol.objective_value + 1e-9 * std::max(1.0, std::abs(sol.objective_value)));
  }
}

TEST_CASE("no sampled feasible point beats the reported optimum") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    auto model = gen::random_binary_milp(rng);
    auto [sol, stats] = solve_milp(model);
    if (sol.status != Status::Optimal) continue;
    std::bernoulli_distribution coin(0.5);
    for (int k = 0; k < 200; ++k) {
      std::vector<double> x(model.num_variables());
      for (auto& v : x) v = coin(rng) ? 1.0 : 0.0;
      if (oracle::satisfies(model, x, 1e-9)) CHECK(oracle::dot(model.objective(), x) >= sol.objective_value - 1e-6);
    }
  }
}

TEST_CASE("solves are deterministic") {
  std::mt19937_64 rng(123);
  auto model = gen::random_binary_milp(rng);
  auto a = solve_milp(model);
  auto b = solve_milp(model);
  CHECK(a.first.status == b.first.status);
  CHECK(a.first.values == b.first.values);
  CHECK(a.second.nodes_explored == b.second.nodes_explored);
}

TEST_CASE("node limit yields LimitReached") {
  Model m;
  LinExpr sum, obj;
  for (int j = 0; j < 10; ++j) {
    auto v = m.add_variable({"x" + std::to_string(j), VarKind::Binary, 0, 1, {}});
    sum.add(2, v);
    obj.add(-(j % 3 + 1.0), v);
  }
  m.add_constraint({"odd", sum, Sense::LessEqual, 9, {}});
  m.set_objective(obj);
  SolveParams p;
  p.node_limit = 1;
  auto [sol, stats] = solve_milp(m, p);
  CHECK(sol.status == Status::LimitReached);
  CHECK(stats.nodes_explored == 1);
}

TEST_CASE("size caps and parameter validation") {
  Model m;
  for (int j = 0; j < 5; ++j) m.add_variable({"x" + std::to_string(j), VarKind::Continuous, 0, 1, {}});
  SolveParams p;
  p.max_variables = 4;
  CHECK_THROWS_AS(solve_lp(m, p), SizeLimitError);
  SolveParams bad;
  bad.feas_tol = 0;
  CHECK_THROWS_AS(solve_milp(m, bad), InputError);
}

TEST_CASE("degenerate LP terminates") {
  // Classic cycling example for Dantzig's rule without anti-cycling.
  Model m;
  auto x1 = m.add_variable({"x1", VarKind::Continuous, 0, kInf, {}});
  auto x2 = m.add_variable({"x2", VarKind::Continuous, 0, kInf, {}});
  auto x3 = m.add_variable({"x3", VarKind::Continuous, 0, kInf, {}});
  auto x4 = m.add_variable({"x4", VarKind::Continuous, 0, kInf, {}});
  m.add_constraint({"r1", 0.5 * LinExpr(x1) - 5.5 * LinExpr(x2) - 2.5 * LinExpr(x3) + 9.0 * LinExpr(x4), Sense::LessEqual, 0, {}});
  m.add_constraint({"r2", 0.5 * LinExpr(x1) - 1.5 * LinExpr(x2) - 0.5 * LinExpr(x3) + 1.0 * LinExpr(x4), Sense::LessEqual, 0, {}});
  m.add_constraint({"r3", LinExpr(x1), Sense::LessEqual, 1, {}});
  m.set_objective(-10.0 * LinExpr(x1) + 57.0 * LinExpr(x2) + 9.0 * LinExpr(x3) + 24.0 * LinExpr(x4));
  auto [sol, stats] = solve_lp(m);
  REQUIRE(sol.status == Status::Optimal);
  CHECK(sol.objective_value == doctest::Approx(-1));
}

TEST_CASE("model without variables") {
  Model m;
  m.set_objective(LinExpr(3.0));
  const auto [sol, st] = solve_milp(m, {});
  CHECK(sol.status == Status::Optimal);
  CHECK(sol.objective_value == 3.0);
}
