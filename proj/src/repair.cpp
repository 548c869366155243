#include "recover/repair.hpp"

#include <chrono>
#include <cmath>
#include <regex>

#include "recover/error.hpp"
#include "recover/model_json.hpp"
#include "recover/vns.hpp"

namespace recover {

using nlohmann::json;

namespace {

std::regex compile(const std::string& pattern) {
  try {
    return std::regex(pattern, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw InputError("invalid pattern '" + pattern + "': " + e.what());
  }
}

void check_weight(double w, const char* name) {
  if (!std::isfinite(w) || w < 0.0) throw InputError(std::string(name) + " must be finite and >= 0");
}

bool is_binary(const VarSpec& v) { return v.kind == VarKind::Binary; }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void RepairSpec::validate() const {
  check_weight(w_cost, "w_cost");
  check_weight(w_dev, "w_dev");
  check_weight(w_dev_cont, "w_dev_cont");
  if (w_cost == 0.0 && w_dev == 0.0) throw InputError("one of w_cost, w_dev must be positive");
  for (const auto& p : freeze_patterns) compile(p);
  for (const auto& r : relax) {
    compile(r.pattern);
    if (r.penalty && (!std::isfinite(*r.penalty) || *r.penalty < 0.0)) {
      throw InputError("relax penalty for '" + r.pattern + "' must be finite and >= 0");
    }
  }
  if (freeze_horizon && std::isnan(*freeze_horizon)) throw InputError("freeze_horizon is NaN");
}

RepairSpec repair_spec_from_json(const json& doc) {
  try {
    RepairSpec s;
    if (doc.contains("freeze") && !doc["freeze"].is_null()) {
      const auto& f = doc["freeze"];
      s.freeze_patterns = f.value("patterns", std::vector<std::string>{});
      if (f.contains("freeze_horizon") && !f["freeze_horizon"].is_null()) {
        s.freeze_horizon = f["freeze_horizon"].get<double>();
      }
    }
    for (const auto& r : doc.value("relax", json::array())) {
      RelaxRule rule{r.at("pattern").get<std::string>(), std::nullopt};
      if (r.contains("penalty") && !r["penalty"].is_null()) rule.penalty = r["penalty"].get<double>();
      s.relax.push_back(std::move(rule));
    }
    if (doc.contains("weights")) {
      const auto& w = doc["weights"];
      s.w_cost = w.value("w_cost", s.w_cost);
      s.w_dev = w.value("w_dev", s.w_dev);
      s.w_dev_cont = w.value("w_dev_cont", s.w_dev_cont);
    }
    s.auto_relax = doc.value("auto_relax", true);
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed repair spec: ") + e.what());
  }
}

json repair_spec_to_json(const RepairSpec& s) {
  json relax = json::array();
  for (const auto& r : s.relax) relax.push_back({{"pattern", r.pattern}, {"penalty", r.penalty ? json(*r.penalty) : json()}});
  json freeze = {{"patterns", s.freeze_patterns}};
  freeze["freeze_horizon"] = s.freeze_horizon ? json(*s.freeze_horizon) : json();
  return {{"freeze", std::move(freeze)},
          {"relax", std::move(relax)},
          {"weights", {{"w_cost", s.w_cost}, {"w_dev", s.w_dev}, {"w_dev_cont", s.w_dev_cont}}},
          {"auto_relax", s.auto_relax}};
}

std::vector<bool> freeze_candidates(const Model& model, const RepairSpec& spec, std::vector<ChangeRecord>* notes) {
  std::vector<bool> out(model.num_variables(), false);
  for (const auto& p : spec.freeze_patterns) {
    const auto re = compile(p);
    bool hit = false;
    for (std::size_t j = 0; j < out.size(); ++j) {
      if (std::regex_match(model.variables()[j].name, re)) out[j] = hit = true;
    }
    if (!hit && notes) notes->push_back({"FreezePatternUnused", p, "matched no variable"});
  }
  if (spec.freeze_horizon) {
    for (std::size_t j = 0; j < out.size(); ++j) {
      const auto& st = model.variables()[j].start_time;
      if (st && *st < *spec.freeze_horizon) out[j] = true;
    }
  }
  return out;
}

std::vector<std::optional<double>> elastic_penalties(const Model& model, const RepairSpec& spec,
                                                     std::vector<ChangeRecord>* notes) {
  std::vector<std::optional<double>> out(model.num_constraints());
  std::vector<std::regex> rules;
  for (const auto& r : spec.relax) rules.push_back(compile(r.pattern));
  std::vector<bool> used(rules.size(), false);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& c = model.constraints()[i];
    bool matched = false;
    for (std::size_t r = 0; r < rules.size() && !matched; ++r) {
      if (!std::regex_match(c.name, rules[r])) continue;
      matched = used[r] = true;
      const auto pen = spec.relax[r].penalty ? spec.relax[r].penalty : c.relax_penalty;
      if (!pen) throw InputError("relax rule '" + spec.relax[r].pattern + "' gives no penalty for " + c.name);
      out[i] = *pen;
    }
    if (!matched && spec.auto_relax && c.relax_penalty) out[i] = *c.relax_penalty;
  }
  for (std::size_t r = 0; r < rules.size(); ++r) {
    if (!used[r] && notes) notes->push_back({"RelaxPatternUnused", spec.relax[r].pattern, "matched no constraint"});
  }
  return out;
}

RepairModel build_repair_model(const Model& perturbed, const Assignment& incumbent, const RepairSpec& spec) {
  spec.validate();
  RepairModel rm;
  rm.spec = spec;
  rm.base_count = perturbed.num_variables();
  rm.original_objective = perturbed.objective();
  auto& m = rm.model;
  const double tol = kDefaultFeasibilityTol;

  const auto candidates = freeze_candidates(perturbed, spec, &rm.notes);
  rm.frozen.assign(rm.base_count, false);
  rm.reference.assign(rm.base_count, std::nullopt);
  for (std::size_t j = 0; j < rm.base_count; ++j) {
    VarSpec v = perturbed.variables()[j];
    auto it = incumbent.find(v.name);
    if (it != incumbent.end()) rm.reference[j] = perturbed.is_integral({j}) ? std::round(it->second) : it->second;
    if (candidates[j]) {
      if (!rm.reference[j]) {
        rm.notes.push_back({"NoIncumbentValue", v.name, "not frozen"});
      } else if (*rm.reference[j] < v.lower - tol || *rm.reference[j] > v.upper + tol) {
        rm.notes.push_back({"ForcedUnfreeze", v.name, "incumbent value " + fmt(*rm.reference[j]) + " out of bounds"});
      } else {
        rm.frozen[j] = true;
        v.lower = v.upper = *rm.reference[j];
      }
    }
    m.add_variable(std::move(v));
  }

  LinExpr objective = spec.w_cost * perturbed.objective();
  const auto penalties = elastic_penalties(perturbed, spec, &rm.notes);
  for (std::size_t i = 0; i < perturbed.num_constraints(); ++i) {
    ConstraintSpec c = perturbed.constraints()[i];
    if (penalties[i]) {
      ElasticRow row{i, *penalties[i], std::nullopt, std::nullopt};
      auto slack = [&](const std::string& prefix) {
        return m.add_variable({prefix + c.name, VarKind::Continuous, 0.0, kInf, std::nullopt});
      };
      if (c.sense != Sense::LessEqual) row.plus = slack(c.sense == Sense::Equal ? "slack+:" : "slack:");
      if (c.sense != Sense::GreaterEqual) row.minus = slack(c.sense == Sense::Equal ? "slack-:" : "slack:");
      if (row.plus) {
        c.expr.add(1.0, *row.plus);
        objective.add(row.penalty, *row.plus);
      }
      if (row.minus) {
        c.expr.add(-1.0, *row.minus);
        objective.add(row.penalty, *row.minus);
      }
      rm.elastic.push_back(row);
    }
    m.add_constraint(std::move(c));
  }

  for (std::size_t j = 0; j < rm.base_count; ++j) {
    if (!rm.reference[j] || rm.frozen[j]) continue;
    const auto& v = perturbed.variables()[j];
    const double ref = *rm.reference[j];
    if (is_binary(v)) {
      if (spec.w_dev == 0.0) continue;
      // ref (1 - x) + (1 - ref) x
      objective.add(spec.w_dev * (1.0 - 2.0 * ref), VarId{j});
      objective.add_constant(spec.w_dev * ref);
    } else if (spec.w_dev_cont > 0.0) {
      const auto dp = m.add_variable({"dev+:" + v.name, VarKind::Continuous, 0.0, kInf, std::nullopt});
      const auto dm = m.add_variable({"dev-:" + v.name, VarKind::Continuous, 0.0, kInf, std::nullopt});
      LinExpr e(VarId{j});
      e.add(-1.0, dp);
      e.add(1.0, dm);
      m.add_constraint({"dev:" + v.name, e, Sense::Equal, ref, std::nullopt});
      objective.add(spec.w_dev_cont, dp);
      objective.add(spec.w_dev_cont, dm);
      rm.cont_dev.emplace_back(dp, dm);
      rm.cont_dev_var.push_back(j);
    }
  }
  m.set_objective(std::move(objective));
  return rm;
}

Solution complete_point(const RepairModel& rm, std::span<const double> base) {
  Solution s;
  s.status = Status::Feasible;
  s.values.assign(rm.model.num_variables(), 0.0);
  std::copy(base.begin(), base.begin() + static_cast<std::ptrdiff_t>(rm.base_count), s.values.begin());
  for (const auto& row : rm.elastic) {
    const auto& c = rm.model.constraints()[row.constraint];
    double lhs = c.expr.constant();
    for (const auto& t : c.expr.terms()) {
      if (t.var.index < rm.base_count) lhs += t.coefficient * s.values[t.var.index];
    }
    if (row.plus) s.values[row.plus->index] = std::max(0.0, c.rhs - lhs);
    if (row.minus) s.values[row.minus->index] = std::max(0.0, lhs - c.rhs);
  }
  for (std::size_t k = 0; k < rm.cont_dev.size(); ++k) {
    const double d = s.values[rm.cont_dev_var[k]] - *rm.reference[rm.cont_dev_var[k]];
    s.values[rm.cont_dev[k].first.index] = std::max(0.0, d);
    s.values[rm.cont_dev[k].second.index] = std::max(0.0, -d);
  }
  s.objective_value = evaluate_expr(rm.model.objective(), s);
  return s;
}

Solution base_solution(const RepairModel& rm, const Solution& full) {
  Solution s;
  s.status = full.status;
  if (!full.values.empty()) s.values.assign(full.values.begin(), full.values.begin() + static_cast<std::ptrdiff_t>(rm.base_count));
  s.objective_value = s.values.empty() ? full.objective_value : evaluate_expr(rm.original_objective, s);
  return s;
}

RepairMetrics repair_metrics(const RepairModel& rm, const Solution& full) {
  RepairMetrics out;
  const auto& x = full.values;
  out.original_objective = evaluate_expr(rm.original_objective, std::span<const double>(x.data(), rm.base_count));
  for (std::size_t j = 0; j < rm.base_count; ++j) {
    if (!rm.reference[j]) continue;
    const double d = x[j] - *rm.reference[j];
    if (is_binary(rm.model.variables()[j])) {
      if (std::abs(d) > 0.5) out.deviation_count += 1.0;
    } else {
      out.continuous_deviation += std::abs(d);
    }
  }
  for (const auto& row : rm.elastic) {
    if (row.plus) out.violation_penalty_total += row.penalty * x[row.plus->index];
    if (row.minus) out.violation_penalty_total += row.penalty * x[row.minus->index];
  }
  const auto& s = rm.spec;
  out.repair_objective = s.w_cost * out.original_objective + s.w_dev * out.deviation_count +
                         s.w_dev_cont * out.continuous_deviation + out.violation_penalty_total;
  return out;
}

void VnsParams::validate() const {
  if (iter_budget < 1) throw InputError("iter_budget must be >= 1");
  if (sub_node_limit < 1) throw InputError("sub_node_limit must be >= 1");
}

VnsParams vns_params_from_json(const json& doc) {
  try {
    VnsParams p;
    p.k_max = doc.value("k_max", p.k_max);
    p.iter_budget = doc.value("iter_budget", p.iter_budget);
    p.sub_node_limit = doc.value("sub_node_limit", p.sub_node_limit);
    p.seed = doc.value("seed", p.seed);
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed VNS parameters: ") + e.what());
  }
}

json vns_params_to_json(const VnsParams& p) {
  return {{"k_max", p.k_max}, {"iter_budget", p.iter_budget}, {"sub_node_limit", p.sub_node_limit}, {"seed", p.seed}};
}

namespace {

RepairResult finish(const RepairCase& rc, const RepairModel& rm, std::string method, const Solution& full,
                    SolveStats stats) {
  RepairResult r;
  r.method = std::move(method);
  r.status = full.status;
  r.stats = std::move(stats);
  r.conflicts = rc.conflicts;
  r.notes = rm.notes;
  r.plan = json();
  if (!full.has_values()) return r;
  r.solution = base_solution(rm, full);
  r.kpis = kpi_report(rc.perturbed, r.solution);
  const auto m = repair_metrics(rm, full);
  r.kpis["original_objective"] = m.original_objective;
  r.kpis["deviation_count"] = m.deviation_count;
  r.kpis["continuous_deviation"] = m.continuous_deviation;
  r.kpis["violation_penalty_total"] = m.violation_penalty_total;
  r.kpis["repair_objective"] = m.repair_objective;
  r.plan = rc.plan_json(r.solution);
  r.diff = rc.diff(r.solution);
  return r;
}

Solution start_point(const RepairCase& rc, const RepairModel& rm) {
  const auto base = from_assignment(rc.perturbed, rc.start);
  return complete_point(rm, base.values);
}

}  // namespace

RepairResult repair_exact(const RepairCase& rc, const RepairSpec& spec, const SolveParams& params) {
  const auto rm = build_repair_model(rc.perturbed, rc.incumbent, spec);
  auto [sol, stats] = solve_milp(rm.model, params);
  return finish(rc, rm, "exact", sol, std::move(stats));
}

RepairResult repair_vns(const RepairCase& rc, const RepairSpec& spec, const VnsParams& vns, const SolveParams& params) {
  vns.validate();
  const auto rm = build_repair_model(rc.perturbed, rc.incumbent, spec);
  auto out = vns_search(rm, start_point(rc, rm), rc.blocks, vns, params);
  auto r = finish(rc, rm, "vns", out.best, std::move(out.stats));
  r.trajectory = std::move(out.trajectory);
  r.improvements = out.improvements;
  r.notes.insert(r.notes.end(), out.notes.begin(), out.notes.end());
  return r;
}

std::optional<double> projection_objective(const RepairCase& rc, const RepairSpec& spec) {
  const auto rm = build_repair_model(rc.perturbed, rc.incumbent, spec);
  const auto p = start_point(rc, rm);
  if (!check_feasible(rm.model, p, kDefaultFeasibilityTol).empty()) return std::nullopt;
  return p.objective_value;
}

json repair_result_to_json(const RepairResult& r) {
  json kpis = json::object();
  for (const auto& [k, v] : r.kpis) kpis[k] = number_to_json(v);
  json trajectory = json::array();
  for (const auto& t : r.trajectory) {
    trajectory.push_back({{"iteration", t.iteration}, {"k", t.k}, {"accepted", t.accepted}, {"objective", t.objective}});
  }
  return {{"method", r.method},
          {"status", to_string(r.status)},
          {"plan", r.plan},
          {"kpis", std::move(kpis)},
          {"diff", records_to_json(r.diff)},
          {"conflicts", records_to_json(r.conflicts)},
          {"notes", records_to_json(r.notes)},
          {"stats",
           {{"simplex_iterations", r.stats.simplex_iterations},
            {"nodes_explored", r.stats.nodes_explored},
            {"diagnostic", r.stats.diagnostic}}},
          {"trajectory", std::move(trajectory)},
          {"improvements", r.improvements}};
}

}  // namespace recover
