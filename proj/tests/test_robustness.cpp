#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "recover/domains.hpp"
#include "recover/error.hpp"
#include "recover/robustness.hpp"
#include "route_oracle.hpp"

using namespace recover;
using nlohmann::json;

namespace {

json load(const std::string& rel) {
  std::ifstream in(std::string(RECOVER_DATA_DIR) + "/" + rel);
  REQUIRE(in.good());
  return json::parse(in);
}

tail::TailPlan as_tail_plan(const oracle::RoutePlan& p) { return {p.routes, {}}; }

oracle::RoutePlan as_route_plan(const tail::TailPlan& p) {
  oracle::RoutePlan r;
  for (const auto& [ac, route] : p.routes) {
    if (!route.empty()) r.routes[ac] = route;
  }
  return r;
}

double oracle_repair(const tail::Timetable& nominal, const Scenario& s, const tail::TailPlan& inc,
                     const RepairSpec& spec) {
  const auto perturbed = apply_scenario(nominal, s);
  const auto best = oracle::enumerate_routes(
      perturbed, true,
      oracle::repair_score(nominal, perturbed, as_route_plan(inc), spec.w_cost, spec.w_dev, perturbed.costs.cancellation));
  REQUIRE(best);
  return best->cost;
}

struct PlanTotal {
  oracle::RoutePlan plan;
  double nominal = 0.0;
  double total = 0.0;
};

// Every nominal plan, priced with brute-force repairs per scenario.
std::vector<PlanTotal> first_stage_totals(const tail::Timetable& tt, const std::vector<Scenario>& scenarios,
                                          const RepairSpec& spec, double alpha) {
  std::vector<PlanTotal> out;
  oracle::enumerate_routes(tt, false, [&](const oracle::RoutePlan& p, double idle) {
    out.push_back({p, idle, 0.0});
    return idle;
  });
  for (auto& pt : out) {
    double wsum = 0.0, w = 0.0;
    for (const auto& s : scenarios) {
      const double price = oracle_repair(tt, s, as_tail_plan(pt.plan), spec) - spec.w_cost * pt.nominal;
      wsum += s.weight * price;
      w += s.weight;
    }
    pt.total = pt.nominal + alpha * (w > 0.0 ? wsum / w : 0.0);
  }
  return out;
}

double best_total(const std::vector<PlanTotal>& all) {
  double best = kInf;
  for (const auto& pt : all) best = std::min(best, pt.total);
  return best;
}

}  // namespace

TEST_CASE("recovery price on the T1 delay") {
  const auto domain = load_domain(load("t1.json"));
  const auto spec = repair_spec_from_json(load("specs/default.json"));
  const json plan = tail::plan_to_json({{{"ac1", {"f1", "f2"}}, {"ac2", {"f3", "f4"}}}, {}});
  const auto scenario = scenario_from_json(load("scenarios/t1_delay.json"));
  const auto rc = domain->repair_case(plan, scenario);
  const auto r = run_repair(rc, spec, {});
  CHECK(rc.nominal_objective == doctest::Approx(75.0));
  CHECK(recovery_price(rc, r, spec) == doctest::Approx(9977.0));

  RepairResult none;
  none.status = Status::Infeasible;
  CHECK(std::isinf(recovery_price(rc, none, spec)));
}

TEST_CASE("evaluate_recoverability matches per-scenario enumeration") {
  const auto tt = tail::timetable_from_json(load("t1.json"));
  const auto domain = load_domain(load("t1.json"));
  const auto spec = repair_spec_from_json(load("specs/default.json"));
  auto scenarios = scenario_set_from_json(load("scenarios/t1_set.json"));
  scenarios[1].weight = 3.0;
  const tail::TailPlan inc{{{"ac1", {"f1", "f2"}}, {"ac2", {"f3", "f4"}}}, {}};

  const auto report = evaluate_recoverability(*domain, tail::plan_to_json(inc), scenarios, spec);
  CHECK(report.nominal_objective == doctest::Approx(75.0));
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].scenario == "cancel-f3");
  CHECK(report.rows[1].scenario == "delay-f1");
  double wsum = 0.0, sum = 0.0, mx = -kInf;
  for (const auto& row : report.rows) {
    const auto s = row.scenario == "cancel-f3" ? scenarios[1] : scenarios[0];
    const double expected = oracle_repair(tt, s, inc, spec) - 75.0;
    CHECK(row.status == Status::Optimal);
    CHECK(row.recovery_price == doctest::Approx(expected).epsilon(1e-9));
    CHECK(row.repair_objective == doctest::Approx(expected + 75.0).epsilon(1e-9));
    CHECK(row.weight == s.weight);
    sum += expected;
    wsum += s.weight * expected;
    mx = std::max(mx, expected);
  }
  CHECK(report.max == doctest::Approx(mx));
  CHECK(report.mean == doctest::Approx(sum / 2.0));
  CHECK(report.weighted_mean == doctest::Approx(wsum / 4.0));

  const auto vns = evaluate_recoverability(*domain, tail::plan_to_json(inc), scenarios, spec,
                                           {RepairMethod::Vns, VnsParams{}, SolveParams{}});
  for (std::size_t i = 0; i < 2; ++i) CHECK(vns.rows[i].recovery_price >= report.rows[i].recovery_price - 1e-9);

  const auto again = evaluate_recoverability(*domain, tail::plan_to_json(inc), scenarios, spec);
  CHECK(report_to_json(again).dump() == report_to_json(report).dump());
}

TEST_CASE("aggregates") {
  RecoverabilityReport r;
  aggregate(r);
  CHECK(r.max == 0.0);
  CHECK(r.weighted_mean == 0.0);

  r.rows = {{"a", 0.0, Status::Optimal, 4.0, 0.0}, {"b", 0.0, Status::Optimal, 2.0, 0.0}};
  aggregate(r);
  CHECK(r.max == 4.0);
  CHECK(r.mean == 3.0);
  CHECK(r.weighted_mean == 0.0);

  r.rows.push_back({"c", 1.0, Status::Infeasible, kInf, kInf});
  aggregate(r);
  CHECK(std::isinf(r.max));
  CHECK(std::isinf(r.weighted_mean));
  const auto j = report_to_json(r);
  CHECK(j["aggregates"]["max"].is_null());
  CHECK(j["rows"][2]["recovery_price"].is_null());
  CHECK(report_to_csv(r) ==
        "scenario,weight,status,recovery_price,repair_objective\n"
        "a,0,Optimal,4,0\nb,0,Optimal,2,0\nc,1,Infeasible,inf,inf\n");
}

TEST_CASE("evaluation with no scenarios") {
  const auto domain = load_domain(load("t1.json"));
  const json plan = tail::plan_to_json({{{"ac1", {"f1", "f2"}}, {"ac2", {"f3", "f4"}}}, {}});
  const auto report = evaluate_recoverability(*domain, plan, {}, RepairSpec{});
  CHECK(report.rows.empty());
  CHECK(report.weighted_mean == 0.0);
  CHECK(report.nominal_objective == doctest::Approx(75.0));
}

TEST_CASE("two-stage on T1 agrees with first-stage enumeration") {
  const auto tt = tail::timetable_from_json(load("t1.json"));
  const auto domain = load_domain(load("t1.json"));
  const auto spec = repair_spec_from_json(load("specs/default.json"));
  const auto scenarios = scenario_set_from_json(load("scenarios/t1_set.json"));

  for (double alpha : {0.25, 1.0, 3.0}) {
    CAPTURE(alpha);
    const auto all = first_stage_totals(tt, scenarios, spec, alpha);
    REQUIRE(!all.empty());
    const double best = best_total(all);

    const auto sim = two_stage_solve(*domain, scenarios, spec, alpha, TwoStageMode::Simultaneous);
    REQUIRE(sim.status == Status::Optimal);
    CHECK(sim.total == doctest::Approx(best).epsilon(1e-9));
    CHECK(domain->validate(sim.plan).empty());

    const auto ef = extensive_form(*domain, scenarios, spec, alpha);
    const auto [efsol, st] = solve_milp(ef, {});
    CHECK(efsol.objective_value == doctest::Approx(sim.total).epsilon(1e-9));

    const auto sep = two_stage_solve(*domain, scenarios, spec, alpha, TwoStageMode::Separate);
    REQUIRE(sep.status == Status::Optimal);
    REQUIRE(!sep.pool_totals.empty());
    CHECK(sim.total <= sep.total + 1e-9);
    CHECK(sep.total <= sep.pool_totals.front() + 1e-9);
    CHECK(sep.pool_totals.size() <= 10);

    // the first pool plan is a nominal optimum; its enumerated total must match
    const auto nominal = oracle::nominal_optimum(tt);
    REQUIRE(nominal);
    bool found = false;
    for (const auto& pt : all) {
      if (tail::plan_to_json(as_tail_plan(pt.plan)) == domain->decode(domain->encode(sep.plan))) {
        CHECK(pt.total == doctest::Approx(sep.total).epsilon(1e-9));
        found = true;
      }
    }
    CHECK(found);
    for (double t : sep.pool_totals) CHECK(t >= best - 1e-9);
  }
}

TEST_CASE("alpha = 0 gives the nominal optimum") {
  const auto tt = tail::timetable_from_json(load("t1.json"));
  const auto domain = load_domain(load("t1.json"));
  const auto scenarios = scenario_set_from_json(load("scenarios/t1_set.json"));
  const auto nominal = oracle::nominal_optimum(tt);
  REQUIRE(nominal);
  for (auto mode : {TwoStageMode::Simultaneous, TwoStageMode::Separate}) {
    const auto r = two_stage_solve(*domain, scenarios, RepairSpec{}, 0.0, mode);
    REQUIRE(r.status == Status::Optimal);
    CHECK(r.nominal_objective == doctest::Approx(nominal->cost));
    CHECK(r.total == doctest::Approx(nominal->cost));
  }
  CHECK_THROWS_AS(two_stage_solve(*domain, scenarios, RepairSpec{}, -1.0, TwoStageMode::Simultaneous), InputError);
}

TEST_CASE("two-stage on random timetables") {
  std::mt19937_64 rng(4242);
  RepairSpec spec;
  int checked = 0;
  for (int trial = 0; trial < 25; ++trial) {
    auto tt = oracle::random_timetable(rng, 5, 2);
    tt.costs.cancellation = 500.0;
    if (!oracle::nominal_optimum(tt)) continue;
    std::vector<Scenario> scenarios{oracle::random_disruption(rng, tt, "s1"), oracle::random_disruption(rng, tt, "s2")};
    scenarios[1].weight = 2.0;
    const double alpha = 0.5 + trial % 3;
    const auto domain = load_domain(tail::timetable_to_json(tt));
    const double best = best_total(first_stage_totals(tt, scenarios, spec, alpha));
    const auto sim = two_stage_solve(*domain, scenarios, spec, alpha, TwoStageMode::Simultaneous);
    REQUIRE(sim.status == Status::Optimal);
    CHECK(sim.total == doctest::Approx(best).epsilon(1e-9));
    const auto sep = two_stage_solve(*domain, scenarios, spec, alpha, TwoStageMode::Separate, {}, 4);
    CHECK(sim.total <= sep.total + 1e-9);
    ++checked;
  }
  CHECK(checked >= 10);
}

TEST_CASE("two-stage on P1 with a new order") {
  const auto domain = load_domain(load("p1.json"));
  const auto spec = repair_spec_from_json(load("specs/default.json"));
  const std::vector<Scenario> scenarios{scenario_from_json(load("scenarios/p1_new_order.json"))};
  const auto sim = two_stage_solve(*domain, scenarios, spec, 1.0, TwoStageMode::Simultaneous);
  REQUIRE(sim.status == Status::Optimal);
  const auto sep = two_stage_solve(*domain, scenarios, spec, 1.0, TwoStageMode::Separate);
  REQUIRE(sep.status == Status::Optimal);
  CHECK(sep.pool_totals.size() == 1);
  CHECK(sim.total <= sep.total + 1e-6);
  const auto [efsol, st] = solve_milp(extensive_form(*domain, scenarios, spec, 1.0), {});
  CHECK(efsol.objective_value == doctest::Approx(sim.total).epsilon(1e-9));
  CHECK(domain->validate(sim.plan).empty());
}

TEST_CASE("oversized extensive form points at separate mode") {
  const auto domain = load_domain(load("t1.json"));
  const auto scenarios = scenario_set_from_json(load("scenarios/t1_set.json"));
  EvalOptions opt;
  opt.solve.max_variables = 30;
  try {
    two_stage_solve(*domain, scenarios, RepairSpec{}, 1.0, TwoStageMode::Simultaneous, opt);
    FAIL("expected SizeLimitError");
  } catch (const SizeLimitError& e) {
    CHECK(std::string(e.what()).find("separate") != std::string::npos);
  }
  CHECK(parse_mode("separate") == TwoStageMode::Separate);
  CHECK_THROWS_AS(parse_mode("both"), InputError);
  CHECK_THROWS_AS(parse_method("greedy"), InputError);
}

TEST_CASE("empty scenario prices at zero for the nominal optimum") {
  const auto domain = load_domain(load("t1.json"));
  const auto [sol, st] = solve_milp(domain->nominal_model(), {});
  const auto plan = domain->decode(sol);
  const auto report =
      evaluate_recoverability(*domain, plan, {scenario_from_json(load("scenarios/empty.json"))}, RepairSpec{});
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].recovery_price == doctest::Approx(0.0));
  CHECK(report.max == doctest::Approx(0.0));
  CHECK(report.weighted_mean == doctest::Approx(0.0));

  const auto r = two_stage_solve(*domain, {scenario_from_json(load("scenarios/empty.json"))}, RepairSpec{}, 1.0,
                                 TwoStageMode::Simultaneous);
  CHECK(r.total == doctest::Approx(75.0));
}

TEST_CASE("splitting a scenario leaves weighted aggregates unchanged") {
  const auto domain = load_domain(load("t1.json"));
  const auto spec = repair_spec_from_json(load("specs/default.json"));
  const json plan = tail::plan_to_json({{{"ac1", {"f1", "f2"}}, {"ac2", {"f3", "f4"}}}, {}});
  auto base = scenario_set_from_json(load("scenarios/t1_set.json"));
  base[0].weight = 2.0;
  auto split = base;
  split[0].weight = 1.0;
  auto copy = split[0];
  copy.id = "delay-f1-copy";
  split.push_back(copy);
  const auto a = evaluate_recoverability(*domain, plan, base, spec);
  const auto b = evaluate_recoverability(*domain, plan, split, spec);
  CHECK(std::abs(a.weighted_mean - b.weighted_mean) <= 1e-9 * std::max(1.0, std::abs(a.weighted_mean)));
  CHECK(a.max == b.max);
}

TEST_CASE("chosen plan's recovery aggregate does not grow with alpha") {
  const auto domain = load_domain(load("t1.json"));
  const auto spec = repair_spec_from_json(load("specs/default.json"));
  const auto scenarios = scenario_set_from_json(load("scenarios/t1_set.json"));
  double last = kInf;
  for (double alpha : {0.0, 0.1, 0.5, 1.0, 2.0, 5.0}) {
    const auto r = two_stage_solve(*domain, scenarios, spec, alpha, TwoStageMode::Simultaneous);
    REQUIRE(r.status == Status::Optimal);
    CHECK(r.report.weighted_mean <= last + 1e-9);
    last = r.report.weighted_mean;
  }
}
