#include <doctest.h>

#include <fstream>
#include <random>
#include <set>

#include "oracles.hpp"
#include "recover/error.hpp"
#include "recover/model_json.hpp"
#include "recover/solver.hpp"
#include "recover/tail.hpp"
#include "route_oracle.hpp"

using namespace recover;
using namespace recover::tail;

namespace {

Timetable load_t1() {
  std::ifstream in(std::string(RECOVER_DATA_DIR) + "/t1.json");
  return timetable_from_json(nlohmann::json::parse(in));
}

std::set<std::string> flight_arcs(const Timetable& tt, const ConnectionGraph& g) {
  std::set<std::string> out;
  for (const auto& a : g.arcs) {
    if (a.from) out.insert(tt.flights[*a.from].id + ">" + tt.flights[a.to].id);
  }
  return out;
}

}  // namespace

TEST_CASE("T1 connection arcs") {
  const auto tt = load_t1();
  const auto g = build_connection_graph(tt);
  CHECK(flight_arcs(tt, g) == std::set<std::string>{"f1>f2", "f1>f4", "f3>f4"});
  for (const auto& a : g.arcs) {
    if (a.from) CHECK(*a.from != a.to);
  }
}

TEST_CASE("arc predicate is complete on random timetables") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto tt = oracle::random_timetable(rng);
    const auto g = build_connection_graph(tt);
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> have;
    std::set<std::pair<std::size_t, std::size_t>> sources;
    for (const auto& a : g.arcs) {
      if (a.from) {
        have.insert({a.aircraft, *a.from, a.to});
      } else {
        sources.insert({a.aircraft, a.to});
      }
    }
    for (std::size_t k = 0; k < tt.aircraft.size(); ++k) {
      const auto& ac = tt.aircraft[k];
      for (std::size_t j = 0; j < tt.flights.size(); ++j) {
        CHECK(sources.contains({k, j}) == oracle::route_ok(tt, ac, {&tt.flights[j]}));
        for (std::size_t i = 0; i < tt.flights.size(); ++i) {
          if (i == j) continue;
          const bool pair_ok = tt.flights[i].destination == tt.flights[j].origin &&
                               tt.flights[i].arr + tt.turn_time(ac) <= tt.flights[j].dep;
          CHECK(have.contains({k, i, j}) == pair_ok);
        }
      }
    }
  }
}

TEST_CASE("adding a flight keeps existing arcs") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    auto tt = oracle::random_timetable(rng, 6);
    const auto before = flight_arcs(tt, build_connection_graph(tt));
    tt.flights.push_back({"fx", "A", "B", 300, 360, false});
    const auto after = flight_arcs(tt, build_connection_graph(tt));
    for (const auto& a : before) CHECK(after.contains(a));
  }
}

TEST_CASE("zero turn boundary connects") {
  Timetable tt;
  tt.default_turn_time = 0;
  tt.aircraft = {{"ac1", "A", std::nullopt, {}}};
  tt.flights = {{"f1", "A", "B", 0, 60, false}, {"f2", "B", "A", 60, 120, false}};
  const auto g = build_connection_graph(tt);
  CHECK(flight_arcs(tt, g) == std::set<std::string>{"f1>f2"});
  tt.aircraft[0].turn_time = 1;
  CHECK(flight_arcs(tt, build_connection_graph(tt)).empty());
}

TEST_CASE("T1 formulation and optimum") {
  const auto tt = load_t1();
  const auto f = formulate_mip(tt);
  std::size_t flight_arc_vars = 0;
  for (const auto& a : f.graph.arcs) flight_arc_vars += a.from ? 1 : 0;
  CHECK(flight_arc_vars == 6);
  CHECK(f.model.num_variables() == f.graph.arcs.size());
  for (const auto& v : f.model.variables()) CHECK(v.kind == VarKind::Binary);

  const auto [sol, stats] = solve_milp(f.model, {});
  REQUIRE(sol.status == Status::Optimal);
  const auto best = oracle::nominal_optimum(tt);
  REQUIRE(best);
  CHECK(best->cost == doctest::Approx(75.0));
  CHECK(sol.objective_value == doctest::Approx(best->cost).epsilon(1e-9));

  const auto plan = decode_plan(f, sol);
  CHECK(validate_plan(tt, plan).empty());
  CHECK(plan.uncovered.empty());
  std::set<std::vector<std::string>> routes;
  for (const auto& [ac, r] : plan.routes) routes.insert(r);
  CHECK(routes == std::set<std::vector<std::string>>{{"f1", "f2"}, {"f3", "f4"}});

  const auto kpis = kpi_report(f.model, sol);
  CHECK(kpis.at("route_cost") == doctest::Approx(75.0));
  CHECK(kpis.at("aircraft_used") == doctest::Approx(2.0));
  CHECK(kpis.at("flights_uncovered") == doctest::Approx(0.0));
  CHECK(check_feasible(f.model, sol, 1e-6).empty());

  const auto back = encode_plan(f, plan);
  CHECK(back.values == sol.values);
}

TEST_CASE("MIP optimum equals route-partition enumeration on random timetables") {
  std::mt19937_64 rng(2024);
  int feasible = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto tt = oracle::random_timetable(rng);
    const auto f = formulate_mip(tt);
    const auto [sol, stats] = solve_milp(f.model, {});
    const auto best = oracle::nominal_optimum(tt);
    if (!best) {
      CHECK(sol.status == Status::Infeasible);
      continue;
    }
    ++feasible;
    REQUIRE(sol.status == Status::Optimal);
    CHECK(sol.objective_value == doctest::Approx(best->cost).epsilon(1e-9));
    const auto plan = decode_plan(f, sol);
    CHECK(validate_plan(tt, plan).empty());
  }
  CHECK(feasible > 5);
}

TEST_CASE("single-flight cases") {
  Timetable tt;
  tt.flights = {{"f1", "A", "B", 0, 60, false}};
  tt.aircraft = {{"ac1", "A", std::nullopt, {}}};
  auto [sol, st] = solve_milp(formulate_mip(tt).model, {});
  CHECK(sol.status == Status::Optimal);
  CHECK(sol.objective_value == doctest::Approx(0.0));
  tt.aircraft[0].initial_airport = "C";
  CHECK(solve_milp(formulate_mip(tt).model, {}).first.status == Status::Infeasible);
  tt.aircraft.clear();
  CHECK(solve_milp(formulate_mip(tt).model, {}).first.status == Status::Infeasible);
}

TEST_CASE("validate_plan codes") {
  const auto tt = load_t1();
  TailPlan plan{{{"ac1", {"f1", "f2"}}, {"ac2", {"f3", "f4"}}}, {}};
  CHECK(validate_plan(tt, plan).empty());

  TailPlan bad{{{"ac1", {"f3", "f2"}}, {"ac2", {"f1", "f4"}}}, {}};
  auto v = validate_plan(tt, bad);
  REQUIRE(v.size() == 1);
  CHECK(v[0].code == ViolationCode::TurnTimeViolation);
  CHECK(v[0].aircraft == "ac1");
  CHECK(v[0].flights == std::vector<std::string>{"f3", "f2"});

  TailPlan missing{{{"ac1", {"f1", "f2"}}, {"ac2", {"f3"}}}, {}};
  v = validate_plan(tt, missing);
  REQUIRE(v.size() == 1);
  CHECK(v[0].code == ViolationCode::FlightUncovered);
  CHECK(v[0].flights == std::vector<std::string>{"f4"});

  TailPlan wrong_start{{{"ac1", {"f2"}}, {"ac2", {"f3", "f4"}}}, {}};
  v = validate_plan(tt, wrong_start);
  bool seen = false;
  for (const auto& x : v) seen |= x.code == ViolationCode::WrongInitialPosition;
  CHECK(seen);

  TailPlan twice{{{"ac1", {"f1", "f4"}}, {"ac2", {"f3", "f4"}}}, {}};
  v = validate_plan(tt, twice);
  seen = false;
  for (const auto& x : v) seen |= x.code == ViolationCode::FlightDoubleCovered;
  CHECK(seen);

  TailPlan unknown{{{"ac9", {"f1"}}}, {}};
  CHECK_THROWS_AS(validate_plan(tt, unknown), InputError);
}

TEST_CASE("decode rejects broken and fractional solutions") {
  const auto tt = load_t1();
  const auto f = formulate_mip(tt);
  Solution sol;
  sol.status = Status::Feasible;
  sol.values.assign(f.model.num_variables(), 0.0);
  auto plan = decode_plan(f, sol);
  CHECK(plan.uncovered.size() == 4);

  // f1>f2 without a source arc into f1
  const auto arc = f.model.find_variable("y:ac1:f1>f2");
  REQUIRE(arc);
  sol.values[arc->index] = 1.0;
  CHECK_THROWS_AS(decode_plan(f, sol), SolutionError);
  sol.values[arc->index] = 0.5;
  CHECK_THROWS_AS(decode_plan(f, sol), SolutionError);
}

TEST_CASE("timetable and plan JSON round trip") {
  const auto tt = load_t1();
  CHECK(timetable_from_json(timetable_to_json(tt)) == tt);
  TailPlan plan{{{"ac1", {"f1", "f2"}}, {"ac2", {"f3", "f4"}}}, {"f9"}};
  CHECK(plan_from_json(plan_to_json(plan)) == plan);
  CHECK(plan_from_json(nlohmann::json{{"plan", plan_to_json(plan)}}) == plan);
  CHECK_THROWS_AS(timetable_from_json(nlohmann::json::parse(R"({"aircraft":[],"flights":[{"id":"f"}]})")),
                  InputError);
}

TEST_CASE("T1 model serializes to the golden document") {
  const auto f = formulate_mip(load_t1());
  std::ifstream in(std::string(RECOVER_DATA_DIR) + "/golden/t1_model.json");
  REQUIRE(in.good());
  const auto golden = nlohmann::json::parse(in);
  CHECK(model_to_json(f.model) == golden);
  CHECK(model_from_json(golden) == f.model);
}

TEST_CASE("project_plan drops cancelled flights and cuts broken chains") {
  auto tt = load_t1();
  TailPlan inc{{{"ac1", {"f1", "f2"}}, {"ac2", {"f3", "f4"}}}, {}};
  tt.flights[0].dep = 520;
  tt.flights[0].arr = 580;
  auto p = project_plan(tt, inc);
  CHECK(p.routes.at("ac1") == std::vector<std::string>{"f1"});
  CHECK(p.routes.at("ac2") == std::vector<std::string>{"f3", "f4"});
  tt = load_t1();
  tt.flights.erase(tt.flights.begin() + 2);
  p = project_plan(tt, inc);
  CHECK(p.routes.at("ac2").empty());
}
