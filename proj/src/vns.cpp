#include "recover/vns.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace recover {

std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  std::uint64_t r = rng();
  while (r < threshold) r = rng();
  return r % n;
}

std::vector<Block> restrict_blocks(const RepairModel& rm, const std::vector<Block>& blocks) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < rm.base_count; ++j) index.emplace(rm.model.variables()[j].name, j);
  std::vector<Block> out;
  for (const auto& b : blocks) {
    Block kept{b.id, {}};
    for (const auto& v : b.vars) {
      auto it = index.find(v);
      if (it != index.end() && !rm.frozen[it->second]) kept.vars.push_back(v);
    }
    if (!kept.vars.empty()) out.push_back(std::move(kept));
  }
  return out;
}

namespace {

bool better(double candidate, double incumbent) {
  return candidate < incumbent - 1e-9 * std::max(1.0, std::abs(incumbent));
}

void add_stats(SolveStats& total, const SolveStats& s) {
  total.simplex_iterations += s.simplex_iterations;
  total.nodes_explored += s.nodes_explored;
  total.wall_time += s.wall_time;
}

}  // namespace

VnsOutcome vns_search(const RepairModel& rm, const Solution& start, const std::vector<Block>& blocks,
                      const VnsParams& vns, const SolveParams& params) {
  VnsOutcome out;
  const auto free_blocks = restrict_blocks(rm, blocks);

  Solution current = start;
  if (!check_feasible(rm.model, current, params.feas_tol * 10).empty()) {
    // projection is not a valid start: take whatever a capped full solve finds
    out.notes.push_back({"VnsStart", "projection", "infeasible start, seeded by a node-limited full solve"});
    SolveParams capped = params;
    capped.node_limit = vns.sub_node_limit;
    auto [sol, stats] = solve_milp(rm.model, capped);
    add_stats(out.stats, stats);
    if (!sol.has_values()) {
      out.best = sol;
      return out;
    }
    current = sol;
  }
  current.status = Status::Feasible;
  current.objective_value = evaluate_expr(rm.model.objective(), current);

  const std::size_t nb = free_blocks.size();
  if (nb == 0) {
    out.best = current;
    return out;
  }
  const std::size_t k_max = vns.k_max == 0 ? nb : std::min(vns.k_max, nb);

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < rm.base_count; ++j) index.emplace(rm.model.variables()[j].name, j);

  std::mt19937_64 rng(vns.seed);
  std::vector<std::size_t> order(nb);
  std::size_t k = 1;
  for (std::size_t it = 1; it <= vns.iter_budget; ++it) {
    // partial Fisher-Yates: first k entries are the shaken blocks
    for (std::size_t i = 0; i < nb; ++i) order[i] = i;
    for (std::size_t i = 0; i < k; ++i) std::swap(order[i], order[i + bounded_draw(rng, nb - i)]);

    std::vector<bool> open(rm.base_count, false);
    for (std::size_t i = 0; i < k; ++i) {
      for (const auto& v : free_blocks[order[i]].vars) open[index.at(v)] = true;
    }
    Model sub = rm.model;
    for (std::size_t j = 0; j < rm.base_count; ++j) {
      if (open[j] || rm.frozen[j]) continue;
      const auto& v = rm.model.variables()[j];
      double x = std::clamp(current.values[j], v.lower, v.upper);
      if (v.kind != VarKind::Continuous) x = std::round(x);
      sub.set_bounds(VarId{j}, x, x);
    }
    SolveParams sp = params;
    sp.node_limit = vns.sub_node_limit;
    auto [sol, stats] = solve_milp(sub, sp);
    add_stats(out.stats, stats);

    const std::size_t shaken = k;
    bool accepted = false;
    if (sol.has_values()) {
      const double obj = evaluate_expr(rm.model.objective(), sol);
      if (better(obj, current.objective_value)) {
        current.values = sol.values;
        current.objective_value = obj;
        accepted = true;
      }
    }
    if (accepted) {
      ++out.improvements;
      k = 1;
    } else {
      k = k % k_max + 1;
    }
    out.trajectory.push_back({it, shaken, accepted, current.objective_value});
  }
  out.best = current;
  out.best.status = Status::Feasible;
  return out;
}

}  // namespace recover
