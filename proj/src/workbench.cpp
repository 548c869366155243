#include "recover/workbench.hpp"

#include <cmath>
#include <cstdio>

#include "recover/error.hpp"
#include "recover/model_json.hpp"

namespace recover::workbench {

using nlohmann::json;

Outcome outcome_of(Status s) {
  switch (s) {
    case Status::Optimal:
    case Status::Feasible:
      return Outcome::Ok;
    case Status::LimitReached:
      return Outcome::LimitReached;
    case Status::Infeasible:
    case Status::Unbounded:
      break;
  }
  return Outcome::Infeasible;
}

int exit_code(Outcome o) {
  switch (o) {
    case Outcome::Ok:
      return 0;
    case Outcome::Infeasible:
      return 2;
    case Outcome::InputError:
      return 3;
    case Outcome::LimitReached:
      return 4;
  }
  return 3;
}

json plan_body(const json& doc) {
  if (doc.is_object() && doc.contains("plan")) {
    if (!doc["plan"].is_object()) throw InputError("plan document has no plan (status " + doc.value("status", "?") + ")");
    return doc["plan"];
  }
  return doc;
}

Output plan(const Domain& domain, const SolveParams& params) {
  const Model m = domain.nominal_model();
  const auto [sol, stats] = solve_milp(m, params);
  json doc = {{"domain", domain.kind()}, {"status", to_string(sol.status)}};
  if (sol.has_values()) {
    doc["objective"] = sol.objective_value;
    doc["plan"] = domain.decode(sol);
    json kpis = json::object();
    for (const auto& [k, v] : kpi_report(m, sol)) kpis[k] = number_to_json(v);
    doc["kpis"] = std::move(kpis);
  } else {
    doc["objective"] = nullptr;
    doc["plan"] = nullptr;
  }
  doc["stats"] = {{"simplex_iterations", stats.simplex_iterations},
                  {"nodes_explored", stats.nodes_explored},
                  {"diagnostic", stats.diagnostic}};
  return {std::move(doc), outcome_of(sol.status), {}};
}

Output repair(const Domain& domain, const json& incumbent, const Scenario& scenario, const RepairSpec& spec,
              const EvalOptions& opt) {
  spec.validate();
  const auto rc = domain.repair_case(plan_body(incumbent), scenario);
  const auto r = run_repair(rc, spec, opt);
  json doc = repair_result_to_json(r);
  doc["domain"] = domain.kind();
  doc["scenario"] = scenario.id;
  const double price = recovery_price(rc, r, spec);
  doc["recovery_price"] = std::isfinite(price) ? json(price) : json();
  return {std::move(doc), outcome_of(r.status), {}};
}

Output evaluate(const Domain& domain, const json& plan, const std::vector<Scenario>& scenarios, const RepairSpec& spec,
                const EvalOptions& opt) {
  const auto report = evaluate_recoverability(domain, plan_body(plan), scenarios, spec, opt);
  json doc = report_to_json(report);
  doc["domain"] = domain.kind();
  doc["method"] = to_string(opt.method);
  Outcome o = Outcome::Ok;
  for (const auto& row : report.rows) {
    if (row.status == Status::LimitReached) o = Outcome::LimitReached;
  }
  return {std::move(doc), o, report_to_csv(report)};
}

Output robust(const Domain& domain, const std::vector<Scenario>& scenarios, const RepairSpec& spec, double alpha,
              TwoStageMode mode, const EvalOptions& opt, std::size_t pool_size) {
  const auto r = two_stage_solve(domain, scenarios, spec, alpha, mode, opt, pool_size);
  json doc = two_stage_to_json(r);
  doc["domain"] = domain.kind();
  return {std::move(doc), outcome_of(r.status), {}};
}

Output validate(const Domain& domain, const std::optional<json>& plan) {
  const Model m = domain.nominal_model();
  json doc = {{"domain", domain.kind()},
              {"model", {{"variables", m.num_variables()}, {"constraints", m.num_constraints()}}}};
  if (!plan) {
    doc["valid"] = true;
    doc["violations"] = json::array();
    return {std::move(doc), Outcome::Ok, {}};
  }
  const auto body = plan_body(*plan);
  auto violations = domain.validate(body);
  if (violations.empty()) {
    const Solution s = domain.encode(body);
    for (const auto& b : check_feasible(m, s, 1e-6)) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6g", b.amount);
      violations.push_back({std::string(to_string(b.kind)) + "Violation", b.name, buf});
    }
    doc["objective"] = evaluate_expr(m.objective(), s);
  }
  doc["valid"] = violations.empty();
  doc["violations"] = records_to_json(violations);
  return {std::move(doc), violations.empty() ? Outcome::Ok : Outcome::Infeasible, {}};
}

EvalOptions eval_options_from_json(const json& body, const SolveParams& base) {
  if (!body.is_object()) throw InputError("request body must be a JSON object");
  EvalOptions opt;
  opt.solve = base;
  try {
    opt.method = parse_method(body.value("method", std::string("exact")));
    if (body.contains("vns")) opt.vns = vns_params_from_json(body["vns"]);
    if (body.contains("seed")) opt.vns.seed = body["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed repair options: ") + e.what());
  }
  return opt;
}

}  // namespace recover::workbench
