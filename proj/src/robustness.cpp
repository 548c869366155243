#include "recover/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <sstream>

#include "recover/error.hpp"

namespace recover {

using nlohmann::json;

RepairMethod parse_method(std::string_view text) {
  if (text == "exact") return RepairMethod::Exact;
  if (text == "vns") return RepairMethod::Vns;
  throw InputError("unknown repair method '" + std::string(text) + "'");
}

std::string_view to_string(RepairMethod m) { return m == RepairMethod::Exact ? "exact" : "vns"; }

TwoStageMode parse_mode(std::string_view text) {
  if (text == "simultaneous") return TwoStageMode::Simultaneous;
  if (text == "separate") return TwoStageMode::Separate;
  throw InputError("unknown two-stage mode '" + std::string(text) + "'");
}

std::string_view to_string(TwoStageMode m) { return m == TwoStageMode::Simultaneous ? "simultaneous" : "separate"; }

RepairResult run_repair(const RepairCase& rc, const RepairSpec& spec, const EvalOptions& opt) {
  return opt.method == RepairMethod::Exact ? repair_exact(rc, spec, opt.solve) : repair_vns(rc, spec, opt.vns, opt.solve);
}

double recovery_price(const RepairCase& rc, const RepairResult& r, const RepairSpec& spec) {
  if (!r.solution.has_values()) return kInf;
  return r.kpis.at("repair_objective") - spec.w_cost * rc.nominal_objective;
}

void aggregate(RecoverabilityReport& report) {
  report.max = report.mean = report.weighted_mean = 0.0;
  if (report.rows.empty()) return;
  double sum = 0.0, wsum = 0.0, wtotal = 0.0;
  report.max = -kInf;
  for (const auto& r : report.rows) {
    report.max = std::max(report.max, r.recovery_price);
    sum += r.recovery_price;
    if (r.weight > 0.0) wsum += r.weight * r.recovery_price;
    wtotal += r.weight;
  }
  report.mean = sum / static_cast<double>(report.rows.size());
  report.weighted_mean = wtotal > 0.0 ? wsum / wtotal : 0.0;
}

RecoverabilityReport evaluate_recoverability(const Domain& domain, const json& plan,
                                             const std::vector<Scenario>& scenarios, const RepairSpec& spec,
                                             const EvalOptions& opt) {
  spec.validate();
  RecoverabilityReport report;
  const Model nominal = domain.nominal_model();
  report.nominal_objective = evaluate_expr(nominal.objective(), domain.encode(plan));

  std::vector<Scenario> sorted = scenarios;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  const auto n = static_cast<std::ptrdiff_t>(sorted.size());
  report.rows.resize(sorted.size());
  std::vector<std::exception_ptr> errors(sorted.size());

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const auto& s = sorted[static_cast<std::size_t>(i)];
      const auto rc = domain.repair_case(plan, s);
      const auto r = run_repair(rc, spec, opt);
      auto& row = report.rows[static_cast<std::size_t>(i)];
      row.scenario = s.id;
      row.weight = s.weight;
      row.status = r.status;
      row.recovery_price = recovery_price(rc, r, spec);
      row.repair_objective = r.solution.has_values() ? r.kpis.at("repair_objective") : kInf;
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  aggregate(report);
  return report;
}

json report_to_json(const RecoverabilityReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"scenario", row.scenario},
                    {"weight", row.weight},
                    {"status", to_string(row.status)},
                    {"recovery_price", std::isfinite(row.recovery_price) ? json(row.recovery_price) : json()},
                    {"repair_objective", std::isfinite(row.repair_objective) ? json(row.repair_objective) : json()}});
  }
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(); };
  return {{"nominal_objective", r.nominal_objective},
          {"rows", std::move(rows)},
          {"aggregates", {{"max", num(r.max)}, {"mean", num(r.mean)}, {"weighted_mean", num(r.weighted_mean)}}}};
}

std::string report_to_csv(const RecoverabilityReport& r) {
  std::ostringstream out;
  out << "scenario,weight,status,recovery_price,repair_objective\n";
  auto num = [](double v) {
    if (!std::isfinite(v)) return std::string("inf");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  for (const auto& row : r.rows) {
    out << row.scenario << ',' << num(row.weight) << ',' << to_string(row.status) << ',' << num(row.recovery_price)
        << ',' << num(row.repair_objective) << '\n';
  }
  return out.str();
}

Model extensive_form(const Domain& domain, const std::vector<Scenario>& scenarios, const RepairSpec& spec, double alpha) {
  spec.validate();
  if (!std::isfinite(alpha) || alpha < 0.0) throw InputError("alpha must be finite and >= 0");
  const Model nominal = domain.nominal_model();
  Model ef;
  for (const auto& v : nominal.variables()) ef.add_variable(v);
  for (const auto& c : nominal.constraints()) {
    ConstraintSpec hard = c;
    hard.relax_penalty.reset();
    ef.add_constraint(std::move(hard));
  }

  double wtotal = 0.0;
  for (const auto& s : scenarios) wtotal += s.weight;
  const bool second_stage = alpha > 0.0 && wtotal > 0.0;

  LinExpr objective = (second_stage ? 1.0 - alpha * spec.w_cost : 1.0) * nominal.objective();
  if (second_stage) {
    for (const auto& s : scenarios) {
      if (s.weight <= 0.0) continue;
      const double scale = alpha * s.weight / wtotal;
      const Model p = domain.perturbed_model(s);
      const auto frozen = freeze_candidates(p, spec);
      const auto penalties = elastic_penalties(p, spec);
      const std::string tag = s.id + "|";

      std::vector<VarId> y;
      for (const auto& v : p.variables()) {
        VarSpec copy = v;
        copy.name = tag + v.name;
        y.push_back(ef.add_variable(std::move(copy)));
      }
      auto remap = [&](const LinExpr& e) {
        LinExpr out(e.constant());
        for (const auto& t : e.terms()) out.add(t.coefficient, y[t.var.index]);
        return out;
      };
      for (std::size_t i = 0; i < p.num_constraints(); ++i) {
        const auto& c = p.constraints()[i];
        ConstraintSpec row{tag + c.name, remap(c.expr), c.sense, c.rhs, std::nullopt};
        if (penalties[i]) {
          auto slack = [&](const std::string& prefix) {
            return ef.add_variable({tag + prefix + c.name, VarKind::Continuous, 0.0, kInf, std::nullopt});
          };
          if (c.sense != Sense::LessEqual) {
            const auto sp = slack(c.sense == Sense::Equal ? "slack+:" : "slack:");
            row.expr.add(1.0, sp);
            objective.add(scale * *penalties[i], sp);
          }
          if (c.sense != Sense::GreaterEqual) {
            const auto sm = slack(c.sense == Sense::Equal ? "slack-:" : "slack:");
            row.expr.add(-1.0, sm);
            objective.add(scale * *penalties[i], sm);
          }
        }
        ef.add_constraint(std::move(row));
      }
      for (std::size_t j = 0; j < p.num_variables(); ++j) {
        const auto& v = p.variables()[j];
        const auto x = nominal.find_variable(v.name);
        if (!x) continue;
        const auto& xv = nominal.variable(*x);
        if (frozen[j] && v.lower <= xv.lower && v.upper >= xv.upper) {
          LinExpr e(y[j]);
          e.add(-1.0, *x);
          ef.add_constraint({tag + "freeze:" + v.name, e, Sense::Equal, 0.0, std::nullopt});
          continue;
        }
        const bool binary = v.kind == VarKind::Binary;
        const double w = binary ? spec.w_dev : spec.w_dev_cont;
        if (w <= 0.0) continue;
        const auto d = ef.add_variable({tag + "dev:" + v.name, VarKind::Continuous, 0.0, binary ? 1.0 : kInf, std::nullopt});
        LinExpr up(d), down(d);
        up.add(-1.0, y[j]);
        up.add(1.0, *x);
        down.add(1.0, y[j]);
        down.add(-1.0, *x);
        ef.add_constraint({tag + "dev+:" + v.name, up, Sense::GreaterEqual, 0.0, std::nullopt});
        ef.add_constraint({tag + "dev-:" + v.name, down, Sense::GreaterEqual, 0.0, std::nullopt});
        objective.add(scale * w, d);
      }
      objective += (scale * spec.w_cost) * remap(p.objective());
    }
  }
  ef.set_objective(std::move(objective));
  return ef;
}

namespace {

Solution nominal_part(const Model& nominal, const Solution& full) {
  Solution s;
  s.status = full.status;
  s.values.assign(full.values.begin(), full.values.begin() + static_cast<std::ptrdiff_t>(nominal.num_variables()));
  s.objective_value = evaluate_expr(nominal.objective(), s);
  return s;
}

void finish(TwoStageResult& out, const Domain& domain, const Solution& nominal_sol, const std::vector<Scenario>& scenarios,
            const RepairSpec& spec, const EvalOptions& opt) {
  out.plan = domain.decode(nominal_sol);
  out.report = evaluate_recoverability(domain, out.plan, scenarios, spec, opt);
  out.nominal_objective = out.report.nominal_objective;
  out.total = out.nominal_objective + out.alpha * out.report.weighted_mean;
}

void add_stats(SolveStats& total, const SolveStats& s) {
  total.simplex_iterations += s.simplex_iterations;
  total.nodes_explored += s.nodes_explored;
  total.wall_time += s.wall_time;
}

}  // namespace

TwoStageResult two_stage_solve(const Domain& domain, const std::vector<Scenario>& scenarios, const RepairSpec& spec,
                               double alpha, TwoStageMode mode, const EvalOptions& opt, std::size_t pool_size) {
  if (!std::isfinite(alpha) || alpha < 0.0) throw InputError("alpha must be finite and >= 0");
  TwoStageResult out;
  out.mode = mode;
  out.alpha = alpha;
  EvalOptions exact = opt;
  exact.method = RepairMethod::Exact;
  const Model nominal = domain.nominal_model();

  if (mode == TwoStageMode::Simultaneous) {
    const Model ef = extensive_form(domain, scenarios, spec, alpha);
    try {
      check_size(ef, opt.solve);
    } catch (const SizeLimitError& e) {
      throw SizeLimitError(std::string(e.what()) + "; the extensive form is too large, use separate mode");
    }
    auto [sol, stats] = solve_milp(ef, opt.solve);
    out.stats = stats;
    out.status = sol.status;
    if (!sol.has_values()) return out;
    finish(out, domain, nominal_part(nominal, sol), scenarios, spec, exact);
    return out;
  }

  Model pool_model = nominal;
  std::vector<std::size_t> binaries;
  for (std::size_t j = 0; j < nominal.num_variables(); ++j) {
    if (nominal.variables()[j].kind == VarKind::Binary) binaries.push_back(j);
  }
  std::optional<TwoStageResult> best;
  for (std::size_t k = 0; k < std::max<std::size_t>(pool_size, 1); ++k) {
    auto [sol, stats] = solve_milp(pool_model, opt.solve);
    add_stats(out.stats, stats);
    if (!sol.has_values()) {
      if (k == 0) out.status = sol.status;
      break;
    }
    TwoStageResult candidate = out;
    candidate.status = sol.status;
    finish(candidate, domain, nominal_part(nominal, sol), scenarios, spec, exact);
    out.pool_totals.push_back(candidate.total);
    if (!best || candidate.total < best->total) best = std::move(candidate);
    if (binaries.empty()) break;
    LinExpr cut;
    double ones = 0.0;
    for (auto j : binaries) {
      if (sol.values[j] > 0.5) {
        cut.add(-1.0, VarId{j});
        ones += 1.0;
      } else {
        cut.add(1.0, VarId{j});
      }
    }
    pool_model.add_constraint({"nogood:" + std::to_string(k), cut, Sense::GreaterEqual, 1.0 - ones, std::nullopt});
  }
  if (!best) return out;
  best->pool_totals = out.pool_totals;
  best->stats = out.stats;
  return *best;
}

json two_stage_to_json(const TwoStageResult& r) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(); };
  json pool = json::array();
  for (double t : r.pool_totals) pool.push_back(num(t));
  return {{"mode", to_string(r.mode)},
          {"alpha", r.alpha},
          {"status", to_string(r.status)},
          {"plan", r.plan},
          {"nominal_objective", r.nominal_objective},
          {"total", num(r.total)},
          {"report", report_to_json(r.report)},
          {"pool_totals", std::move(pool)},
          {"stats", {{"simplex_iterations", r.stats.simplex_iterations}, {"nodes_explored", r.stats.nodes_explored}}}};
}

}  // namespace recover
