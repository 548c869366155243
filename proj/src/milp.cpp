#include <algorithm>
#include <cmath>
#include <queue>

#include "recover/error.hpp"
#include "recover/solver.hpp"

namespace recover {

void SolveParams::validate() const {
  if (!(feas_tol > 0.0) || !(int_tol > 0.0) || !(gap_tol > 0.0)) {
    throw InputError("solver tolerances must be positive");
  }
  if (node_limit < 1) throw InputError("node_limit must be at least 1");
  if (time_limit && !(*time_limit > 0.0)) throw InputError("time_limit must be positive");
}

void check_size(const Model& model, const SolveParams& params) {
  if (model.num_variables() > params.max_variables || model.num_constraints() > params.max_constraints) {
    throw SizeLimitError("model has " + std::to_string(model.num_variables()) + " variables and " +
                         std::to_string(model.num_constraints()) + " constraints; the dense kernel accepts at most " +
                         std::to_string(params.max_variables) + " / " + std::to_string(params.max_constraints));
  }
}

namespace {

using Clock = std::chrono::steady_clock;

detail::Deadline make_deadline(const SolveParams& params, Clock::time_point start) {
  if (!params.time_limit) return std::nullopt;
  return start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(*params.time_limit));
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Rounds integer variables when the rounded point stays feasible.
std::vector<double> polish(const Model& model, std::vector<double> x, const SolveParams& params) {
  Solution trial;
  trial.status = Status::Feasible;
  trial.values = x;
  bool changed = false;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (model.variables()[j].kind != VarKind::Continuous) {
      trial.values[j] = std::round(x[j]);
      changed = true;
    }
  }
  if (changed && check_feasible(model, trial, params.feas_tol, params.int_tol).empty()) return trial.values;
  return x;
}

Solution make_solution(const Model& model, Status status, std::vector<double> values) {
  Solution sol;
  sol.status = status;
  sol.values = std::move(values);
  if (sol.has_values()) sol.objective_value = evaluate_expr(model.objective(), sol);
  return sol;
}

// Optimal results must survive an independent feasibility check.
void verify(const Model& model, Solution& sol, SolveStats& stats, const SolveParams& params) {
  if (sol.status != Status::Optimal) return;
  if (auto breaches = check_feasible(model, sol, params.feas_tol, params.int_tol); !breaches.empty()) {
    sol.status = Status::LimitReached;
    stats.diagnostic = "numerical breakdown: solution violates '" + breaches.front().name + "' by " +
                       std::to_string(breaches.front().amount);
  }
}

struct Node {
  double bound;
  std::size_t seq;
  std::vector<double> lower;
  std::vector<double> upper;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.seq > b.seq;
  }
};

}  // namespace

std::pair<Solution, SolveStats> solve_lp(const Model& model, const SolveParams& params) {
  params.validate();
  check_size(model, params);
  const auto start = Clock::now();
  std::vector<double> lower, upper;
  for (const auto& v : model.variables()) {
    lower.push_back(v.lower);
    upper.push_back(v.upper);
  }
  detail::LpProblem lp(model);
  auto outcome = lp.solve(lower, upper, params, make_deadline(params, start));

  SolveStats stats;
  stats.simplex_iterations = outcome.iterations;
  stats.diagnostic = outcome.diagnostic;
  Solution sol = make_solution(model, outcome.status, std::move(outcome.x));
  if (sol.status == Status::Optimal) stats.best_bound = sol.objective_value;
  // LP solves ignore integrality, so verify against a continuous copy of the bounds check.
  if (sol.status == Status::Optimal) {
    for (std::size_t i = 0; i < model.num_constraints(); ++i) {
      const double v = violation(model.constraints()[i], sol);
      if (v > params.feas_tol) {
        sol.status = Status::LimitReached;
        stats.diagnostic = "numerical breakdown: solution violates '" + model.constraints()[i].name + "'";
        break;
      }
    }
  }
  stats.wall_time = seconds_since(start);
  return {std::move(sol), stats};
}

std::pair<Solution, SolveStats> solve_milp(const Model& model, const SolveParams& params) {
  params.validate();
  check_size(model, params);
  const auto start = Clock::now();
  const auto deadline = make_deadline(params, start);
  const std::size_t n = model.num_variables();
  SolveStats stats;

  Node root{-kInf, 0, {}, {}};
  for (const auto& v : model.variables()) {
    double lo = v.lower;
    double hi = v.upper;
    if (v.kind != VarKind::Continuous) {
      lo = std::ceil(lo - params.int_tol);
      hi = std::floor(hi + params.int_tol);
    }
    root.lower.push_back(lo);
    root.upper.push_back(hi);
  }

  detail::LpProblem lp(model);
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  open.push(std::move(root));
  std::size_t next_seq = 1;

  std::optional<std::vector<double>> incumbent;
  double incumbent_obj = kInf;
  bool limit_hit = false;
  bool incomplete = false;
  auto gap = [&](double obj) { return params.gap_tol * std::max(1.0, std::abs(obj)); };

  while (!open.empty()) {
    if (stats.nodes_explored >= params.node_limit || (deadline && Clock::now() > *deadline)) {
      limit_hit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (incumbent && node.bound >= incumbent_obj - gap(incumbent_obj)) continue;

    auto outcome = lp.solve(node.lower, node.upper, params, deadline);
    ++stats.nodes_explored;
    stats.simplex_iterations += outcome.iterations;

    if (outcome.status == Status::Infeasible) continue;
    if (outcome.status == Status::Unbounded) {
      if (node.seq == 0) {
        stats.wall_time = seconds_since(start);
        return {make_solution(model, Status::Unbounded, {}), stats};
      }
      incomplete = true;
      continue;
    }
    if (outcome.status != Status::Optimal) {
      incomplete = true;
      if (stats.diagnostic.empty()) stats.diagnostic = outcome.diagnostic;
      continue;
    }
    if (incumbent && outcome.objective >= incumbent_obj - gap(incumbent_obj)) continue;

    std::size_t branch = n;
    double best_frac = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (model.variables()[j].kind == VarKind::Continuous) continue;
      const double v = outcome.x[j];
      const double frac = std::abs(v - std::round(v));
      if (frac <= params.int_tol) continue;
      const double score = 0.5 - std::abs(v - std::floor(v) - 0.5);
      if (score > best_frac) {
        best_frac = score;
        branch = j;
      }
    }
    if (branch == n) {
      incumbent = polish(model, std::move(outcome.x), params);
      incumbent_obj = evaluate_expr(model.objective(), std::span<const double>(*incumbent));
      continue;
    }
    const double v = outcome.x[branch];
    Node down{outcome.objective, next_seq++, node.lower, node.upper};
    down.upper[branch] = std::floor(v);
    Node up{outcome.objective, next_seq++, std::move(node.lower), std::move(node.upper)};
    up.lower[branch] = std::ceil(v);
    open.push(std::move(down));
    open.push(std::move(up));
  }

  stats.wall_time = seconds_since(start);
  if (limit_hit || incomplete) {
    stats.best_bound = open.empty() ? incumbent_obj : std::min(incumbent_obj, open.top().bound);
    if (stats.diagnostic.empty()) stats.diagnostic = limit_hit ? "node or time limit reached" : "subproblem failed";
    return {make_solution(model, Status::LimitReached, incumbent ? std::move(*incumbent) : std::vector<double>{}), stats};
  }
  if (!incumbent) return {make_solution(model, Status::Infeasible, {}), stats};
  stats.best_bound = incumbent_obj;
  Solution sol = make_solution(model, Status::Optimal, std::move(*incumbent));
  verify(model, sol, stats, params);
  return {std::move(sol), stats};
}

}  // namespace recover
