#include <doctest.h>

#include <fstream>

#include "recover/error.hpp"
#include "recover/production.hpp"
#include "recover/solver.hpp"
#include "scan_oracle.hpp"

using namespace recover;
using namespace recover::production;

namespace {

Instance load_p1() {
  std::ifstream in(std::string(RECOVER_DATA_DIR) + "/p1.json");
  return instance_from_json(nlohmann::json::parse(in));
}

double cost_components(const std::map<std::string, double>& k) {
  return k.at("production_cost") + k.at("transport_cost") + k.at("holding_cost") + k.at("shortfall_cost") +
         k.at("target_cost");
}

}  // namespace

TEST_CASE("P1 optimum matches the scan") {
  const auto in = load_p1();
  const auto f = formulate_model(in);
  const auto [sol, stats] = solve_milp(f.model, {});
  REQUIRE(sol.status == Status::Optimal);
  const auto scan = oracle::scan_two_period(10, 15, 1, 0.5, 1e9);
  CHECK(scan.cost == doctest::Approx(17.5));
  CHECK(sol.objective_value == doctest::Approx(scan.cost).epsilon(1e-9));

  const auto plan = decode_plan(f, sol);
  CHECK(plan.production.at({"plant", "widget", 1}) == doctest::Approx(scan.stock));
  CHECK(plan.production.at({"plant", "widget", 2}) == doctest::Approx(scan.produce_t2));
  CHECK(plan.inventory.at({"plant", "widget", 1}) == doctest::Approx(5.0));
  CHECK(plan.deliveries.at("o1") == doctest::Approx(15.0));
  CHECK(validate_plan(in, plan).empty());
  CHECK(check_feasible(f.model, sol, 1e-6).empty());

  const auto k = kpi_report(f.model, sol);
  CHECK(cost_components(k) == doctest::Approx(sol.objective_value).epsilon(1e-9));
  CHECK(k.at("service_level") == doctest::Approx(1.0));
  CHECK(k.at("shortfall_qty") == doctest::Approx(0.0));
}

TEST_CASE("scan agrees with the LP across P1 variants") {
  for (double cap : {8.0, 10.0, 14.0}) {
    for (double h : {0.0, 0.25, 2.0}) {
      for (double c : {0.5, 1.0, 3.0}) {
        auto in = load_p1();
        in.capabilities[0].capacity = cap;
        in.capabilities[0].unit_cost = c;
        in.inventory[0].holding_cost = h;
        in.orders[0].priority = 0;
        in.shortfall_penalty = 50;
        const auto f = formulate_model(in);
        const auto [sol, st] = solve_milp(f.model, {});
        REQUIRE(sol.status == Status::Optimal);
        const auto scan = oracle::scan_two_period(cap, 15, c, h, 50);
        CHECK(sol.objective_value == doctest::Approx(scan.cost).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("zero orders and capacity infeasibility") {
  auto in = load_p1();
  in.orders.clear();
  auto f = formulate_model(in);
  auto [sol, st] = solve_milp(f.model, {});
  REQUIRE(sol.status == Status::Optimal);
  CHECK(sol.objective_value == doctest::Approx(0.0));
  for (double v : sol.values) CHECK(v == doctest::Approx(0.0));

  in = load_p1();
  in.orders[0].quantity = 25;
  f = formulate_model(in);
  const auto res = solve_milp(f.model, {});
  CHECK(res.first.status == Status::Infeasible);
  CHECK_THROWS_AS(decode_plan(f, res.first), SolutionError);
}

TEST_CASE("cost scaling keeps the plan optimal") {
  const auto in = load_p1();
  const auto base = solve_milp(formulate_model(in).model, {}).first;
  for (double lambda : {0.5, 2.0, 10.0}) {
    auto scaled = in;
    for (auto& c : scaled.capabilities) c.unit_cost *= lambda;
    for (auto& i : scaled.inventory) i.holding_cost *= lambda;
    for (auto& l : scaled.lanes) l.unit_cost *= lambda;
    const auto f = formulate_model(scaled);
    const auto sol = solve_milp(f.model, {}).first;
    CHECK(sol.objective_value == doctest::Approx(lambda * base.objective_value));
    CHECK(evaluate_expr(f.model.objective(), base) == doctest::Approx(sol.objective_value));
  }
}

TEST_CASE("validate_plan codes") {
  const auto in = load_p1();
  const auto f = formulate_model(in);
  const auto plan = decode_plan(f, solve_milp(f.model, {}).first);

  auto over = plan;
  over.shipments[{"plant", "shop", "widget", 2}] += 1.0;
  auto v = validate_plan(in, over);
  REQUIRE(!v.empty());
  CHECK(v[0].code == ViolationCode::FlowImbalance);

  auto short_plan = plan;
  short_plan.deliveries["o1"] = 14;
  short_plan.shipments[{"plant", "shop", "widget", 2}] = 14;
  short_plan.production[{"plant", "widget", 2}] = 9;
  v = validate_plan(in, short_plan);
  REQUIRE(v.size() == 1);
  CHECK(v[0].code == ViolationCode::HardOrderShorted);
  CHECK(v[0].amount == doctest::Approx(1.0));

  auto cap = plan;
  cap.production[{"plant", "widget", 1}] = 11;
  cap.inventory[{"plant", "widget", 1}] = 11;
  cap.production[{"plant", "widget", 2}] = 4;
  bool seen = false;
  for (const auto& x : validate_plan(in, cap)) seen |= x.code == ViolationCode::CapacityExceeded;
  CHECK(seen);

  auto neg = plan;
  neg.production[{"plant", "widget", 1}] = -1;
  seen = false;
  for (const auto& x : validate_plan(in, neg)) seen |= x.code == ViolationCode::NegativeQuantity;
  CHECK(seen);
}

TEST_CASE("encode and decode agree") {
  const auto in = load_p1();
  const auto f = formulate_model(in);
  const auto sol = solve_milp(f.model, {}).first;
  const auto plan = decode_plan(f, sol);
  const auto enc = encode_plan(f, plan);
  CHECK(check_feasible(f.model, enc, 1e-9).empty());
  CHECK(enc.objective_value == doctest::Approx(sol.objective_value));
  CHECK(plan_from_json(plan_to_json(plan)) == plan);
}

TEST_CASE("instance JSON round trip and reference errors") {
  const auto in = load_p1();
  CHECK(instance_from_json(instance_to_json(in)) == in);
  auto doc = instance_to_json(in);
  doc["lanes"][0]["to"] = "nowhere";
  CHECK_THROWS_AS(instance_from_json(doc), InputError);
  doc = instance_to_json(in);
  doc["orders"][0]["due"] = 3;
  CHECK_THROWS_AS(instance_from_json(doc), InputError);
  doc = instance_to_json(in);
  doc["periods"] = 0;
  CHECK_THROWS_AS(instance_from_json(doc), InputError);
}

TEST_CASE("soft orders and inventory targets") {
  auto in = load_p1();
  in.orders[0].priority = 1;
  in.orders[0].quantity = 25;
  in.shortfall_penalty = 100;
  in.inventory[0].target = 2.0;
  in.inventory[0].target_penalty = 0.1;
  const auto f = formulate_model(in);
  const auto [sol, st] = solve_milp(f.model, {});
  REQUIRE(sol.status == Status::Optimal);
  const auto k = kpi_report(f.model, sol);
  CHECK(k.at("shortfall_qty") == doctest::Approx(5.0));
  CHECK(k.at("service_level") == doctest::Approx(0.8));
  CHECK(cost_components(k) == doctest::Approx(sol.objective_value).epsilon(1e-9));
  const auto plan = decode_plan(f, sol);
  CHECK(validate_plan(in, plan).empty());
}
