#include "recover/production.hpp"

#include <cmath>
#include <set>

#include "recover/error.hpp"
#include "recover/model_json.hpp"

namespace recover::production {

using nlohmann::json;

namespace {

std::string_view kind_name(LocationKind k) {
  switch (k) {
    case LocationKind::Supplier: return "supplier";
    case LocationKind::Plant: return "plant";
    case LocationKind::Customer: return "customer";
  }
  return "plant";
}

LocationKind parse_kind(const std::string& s) {
  if (s == "supplier") return LocationKind::Supplier;
  if (s == "plant") return LocationKind::Plant;
  if (s == "customer") return LocationKind::Customer;
  throw InputError("unknown location kind '" + s + "'");
}

std::string key(const std::string& a, const std::string& b, int t) { return a + ":" + b + ":" + std::to_string(t); }

double optional_number(const json& doc, const char* field, double fallback) {
  if (!doc.contains(field) || doc[field].is_null()) return fallback;
  return number_from_json(doc[field]);
}

}  // namespace

const Location* Instance::find_location(std::string_view id) const {
  for (const auto& l : locations) {
    if (l.id == id) return &l;
  }
  return nullptr;
}

const Order* Instance::find_order(std::string_view id) const {
  for (const auto& o : orders) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

void Instance::validate() const {
  if (periods < 1) throw InputError("periods must be >= 1");
  std::set<std::string> product_set(products.begin(), products.end());
  if (product_set.size() != products.size()) throw InputError("duplicate product id");
  auto need_product = [&](const std::string& p, const std::string& where) {
    if (!product_set.contains(p)) throw InputError(where + " references unknown product '" + p + "'");
  };
  std::set<std::string> ids;
  for (const auto& l : locations) {
    if (!ids.insert(l.id).second) throw InputError("duplicate location id '" + l.id + "'");
  }
  auto need_location = [&](const std::string& id, const std::string& where) -> const Location& {
    const Location* l = find_location(id);
    if (l == nullptr) throw InputError(where + " references unknown location '" + id + "'");
    return *l;
  };
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& lane : lanes) {
    need_location(lane.from, "lane");
    need_location(lane.to, "lane");
    if (lane.from == lane.to) throw InputError("lane from '" + lane.from + "' to itself");
    if (!(lane.capacity >= 0.0)) throw InputError("lane capacity must be >= 0");
    if (!pairs.insert({lane.from, lane.to}).second) throw InputError("duplicate lane " + lane.from + ">" + lane.to);
  }
  pairs.clear();
  for (const auto& c : capabilities) {
    const auto& l = need_location(c.plant, "capability");
    if (l.kind == LocationKind::Customer) throw InputError("customer '" + c.plant + "' cannot produce");
    need_product(c.product, "capability");
    if (!(c.capacity >= 0.0)) throw InputError("production capacity must be >= 0");
    if (!pairs.insert({c.plant, c.product}).second) throw InputError("duplicate capability " + c.plant + "/" + c.product);
  }
  pairs.clear();
  for (const auto& inv : inventory) {
    need_location(inv.location, "inventory");
    need_product(inv.product, "inventory");
    if (inv.initial_stock < 0.0 || inv.holding_cost < 0.0 || inv.target_penalty < 0.0) {
      throw InputError("inventory parameters must be >= 0");
    }
    if (!pairs.insert({inv.location, inv.product}).second) {
      throw InputError("duplicate inventory entry " + inv.location + "/" + inv.product);
    }
  }
  ids.clear();
  for (const auto& o : orders) {
    if (!ids.insert(o.id).second) throw InputError("duplicate order id '" + o.id + "'");
    const auto& l = need_location(o.customer, "order '" + o.id + "'");
    if (l.kind != LocationKind::Customer) throw InputError("order '" + o.id + "' is not placed by a customer");
    need_product(o.product, "order '" + o.id + "'");
    if (o.due < 1 || o.due > periods) throw InputError("order '" + o.id + "' is due outside the horizon");
    if (!(o.quantity > 0.0)) throw InputError("order '" + o.id + "' must have a positive quantity");
  }
  if (!(hard_order_penalty >= 0.0) || !(shortfall_penalty >= 0.0)) throw InputError("penalties must be >= 0");
}

Order order_from_json(const json& o) {
  try {
    return {o.at("id").get<std::string>(), o.at("customer").get<std::string>(), o.at("product").get<std::string>(),
            o.at("due").get<int>(), o.at("quantity").get<double>(), o.value("priority", 0)};
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed order: ") + e.what());
  }
}

json order_to_json(const Order& o) {
  return {{"id", o.id}, {"customer", o.customer}, {"product", o.product}, {"due", o.due}, {"quantity", o.quantity},
          {"priority", o.priority}};
}

Instance instance_from_json(const json& doc) {
  try {
    Instance in;
    in.periods = doc.at("periods").get<int>();
    in.priority_threshold = doc.value("priority_threshold", 0);
    in.hard_order_penalty = doc.value("hard_order_penalty", in.hard_order_penalty);
    in.shortfall_penalty = doc.value("shortfall_penalty", in.shortfall_penalty);
    in.integral_production = doc.value("integral_production", false);
    in.products = doc.at("products").get<std::vector<std::string>>();
    for (const auto& l : doc.at("locations")) {
      in.locations.push_back({l.at("id").get<std::string>(), parse_kind(l.at("kind").get<std::string>())});
    }
    for (const auto& l : doc.value("lanes", json::array())) {
      in.lanes.push_back({l.at("from").get<std::string>(), l.at("to").get<std::string>(), l.value("unit_cost", 0.0),
                          optional_number(l, "capacity", kInf)});
    }
    for (const auto& c : doc.value("capabilities", json::array())) {
      in.capabilities.push_back({c.at("plant").get<std::string>(), c.at("product").get<std::string>(),
                                 c.value("unit_cost", 0.0), optional_number(c, "capacity", kInf)});
    }
    for (const auto& i : doc.value("inventory", json::array())) {
      InventoryParams p{i.at("location").get<std::string>(), i.at("product").get<std::string>(),
                        i.value("holding_cost", 0.0), i.value("initial_stock", 0.0), std::nullopt,
                        i.value("target_penalty", 0.0)};
      if (i.contains("target") && !i["target"].is_null()) p.target = i["target"].get<double>();
      in.inventory.push_back(std::move(p));
    }
    for (const auto& o : doc.value("orders", json::array())) in.orders.push_back(order_from_json(o));
    in.validate();
    return in;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed production instance: ") + e.what());
  }
}

json instance_to_json(const Instance& in) {
  json locations = json::array(), lanes = json::array(), caps = json::array(), inv = json::array(),
       orders = json::array();
  for (const auto& l : in.locations) locations.push_back({{"id", l.id}, {"kind", kind_name(l.kind)}});
  for (const auto& l : in.lanes) {
    lanes.push_back({{"from", l.from}, {"to", l.to}, {"unit_cost", l.unit_cost}, {"capacity", number_to_json(l.capacity)}});
  }
  for (const auto& c : in.capabilities) {
    caps.push_back({{"plant", c.plant}, {"product", c.product}, {"unit_cost", c.unit_cost},
                    {"capacity", number_to_json(c.capacity)}});
  }
  for (const auto& i : in.inventory) {
    json e = {{"location", i.location}, {"product", i.product}, {"holding_cost", i.holding_cost},
              {"initial_stock", i.initial_stock}, {"target_penalty", i.target_penalty}};
    e["target"] = i.target ? json(*i.target) : json(nullptr);
    inv.push_back(std::move(e));
  }
  for (const auto& o : in.orders) orders.push_back(order_to_json(o));
  return {{"periods", in.periods},
          {"priority_threshold", in.priority_threshold},
          {"hard_order_penalty", in.hard_order_penalty},
          {"shortfall_penalty", in.shortfall_penalty},
          {"integral_production", in.integral_production},
          {"products", in.products},
          {"locations", std::move(locations)},
          {"lanes", std::move(lanes)},
          {"capabilities", std::move(caps)},
          {"inventory", std::move(inv)},
          {"orders", std::move(orders)}};
}

Formulation formulate_model(const Instance& in) {
  in.validate();
  Formulation f{in, Model{}, {}, {}, {}, {}, {}, {}};
  auto& model = f.model;
  const int T = in.periods;

  // (location, product, t) -> net outflow expression (must equal stock drawn down).
  std::map<PlantProductPeriod, LinExpr> balance;
  LinExpr production_cost, transport_cost, holding_cost, shortfall_cost, target_cost, shortfall_qty, delivered;

  for (const auto& c : in.capabilities) {
    for (int t = 1; t <= T; ++t) {
      const auto var = model.add_variable({"prod:" + key(c.plant, c.product, t),
                                           in.integral_production ? VarKind::Integer : VarKind::Continuous, 0.0, kInf,
                                           static_cast<double>(t)});
      f.production[{c.plant, c.product, t}] = var;
      balance[{c.plant, c.product, t}].add(-1.0, var);
      production_cost.add(c.unit_cost, var);
    }
  }
  for (const auto& lane : in.lanes) {
    for (const auto& p : in.products) {
      for (int t = 1; t <= T; ++t) {
        const auto var = model.add_variable({"ship:" + lane.from + ">" + lane.to + ":" + p + ":" + std::to_string(t),
                                             VarKind::Continuous, 0.0, kInf, static_cast<double>(t)});
        f.shipments[{lane.from, lane.to, p, t}] = var;
        balance[{lane.from, p, t}].add(1.0, var);
        balance[{lane.to, p, t}].add(-1.0, var);
        transport_cost.add(lane.unit_cost, var);
      }
    }
  }
  std::map<std::pair<std::string, std::string>, double> initial_stock;
  for (const auto& inv : in.inventory) {
    initial_stock[{inv.location, inv.product}] = inv.initial_stock;
    for (int t = 1; t <= T; ++t) {
      const auto var = model.add_variable(
          {"inv:" + key(inv.location, inv.product, t), VarKind::Continuous, 0.0, kInf, static_cast<double>(t)});
      f.inventory[{inv.location, inv.product, t}] = var;
      balance[{inv.location, inv.product, t}].add(1.0, var);
      if (t > 1) {
        balance[{inv.location, inv.product, t}].add(-1.0, f.inventory.at({inv.location, inv.product, t - 1}));
      } else {
        balance[{inv.location, inv.product, t}].add_constant(-inv.initial_stock);
      }
      holding_cost.add(inv.holding_cost, var);
      if (inv.target) {
        const auto gap = model.add_variable(
            {"tgt:" + key(inv.location, inv.product, t), VarKind::Continuous, 0.0, kInf, static_cast<double>(t)});
        f.target_shortfall[{inv.location, inv.product, t}] = gap;
        target_cost.add(inv.target_penalty, gap);
      }
    }
  }
  for (const auto& o : in.orders) {
    const auto var = model.add_variable(
        {"deliver:" + o.id, VarKind::Continuous, 0.0, o.quantity, static_cast<double>(o.due)});
    f.deliveries[o.id] = var;
    balance[{o.customer, o.product, o.due}].add(1.0, var);
    delivered.add(1.0, var);
    if (!in.is_hard(o)) {
      const auto u = model.add_variable({"short:" + o.id, VarKind::Continuous, 0.0, o.quantity, static_cast<double>(o.due)});
      f.shortfall[o.id] = u;
      shortfall_cost.add(in.shortfall_penalty, u);
      shortfall_qty.add(1.0, u);
    }
  }

  for (const auto& [k, expr] : balance) {
    if (expr.empty()) continue;
    const auto& [loc, product, t] = k;
    // inv_t - inv_{t-1} - production - inbound + outbound + deliveries = 0
    LinExpr lhs = expr;
    const double constant = lhs.constant();
    lhs.add_constant(-constant);
    model.add_constraint({"balance:" + key(loc, product, t), lhs, Sense::Equal, -constant, std::nullopt});
  }
  for (const auto& c : in.capabilities) {
    if (!std::isfinite(c.capacity)) continue;
    for (int t = 1; t <= T; ++t) {
      model.add_constraint({"prodcap:" + key(c.plant, c.product, t), LinExpr(f.production.at({c.plant, c.product, t})),
                            Sense::LessEqual, c.capacity, std::nullopt});
    }
  }
  for (const auto& lane : in.lanes) {
    if (!std::isfinite(lane.capacity)) continue;
    for (int t = 1; t <= T; ++t) {
      LinExpr flow;
      for (const auto& p : in.products) flow.add(1.0, f.shipments.at({lane.from, lane.to, p, t}));
      model.add_constraint({"lanecap:" + lane.from + ">" + lane.to + ":" + std::to_string(t), flow, Sense::LessEqual,
                            lane.capacity, std::nullopt});
    }
  }
  for (const auto& o : in.orders) {
    const auto deliver = f.deliveries.at(o.id);
    if (in.is_hard(o)) {
      model.add_constraint({"hard:" + o.id, LinExpr(deliver), Sense::Equal, o.quantity, in.hard_order_penalty});
    } else {
      model.add_constraint({"soft:" + o.id, LinExpr(deliver) + LinExpr(f.shortfall.at(o.id)), Sense::Equal, o.quantity,
                            std::nullopt});
    }
  }
  for (const auto& inv : in.inventory) {
    if (!inv.target) continue;
    for (int t = 1; t <= T; ++t) {
      model.add_constraint({"target:" + key(inv.location, inv.product, t),
                            LinExpr(f.inventory.at({inv.location, inv.product, t})) +
                                LinExpr(f.target_shortfall.at({inv.location, inv.product, t})),
                            Sense::GreaterEqual, *inv.target, std::nullopt});
    }
  }

  double total_demand = 0.0;
  for (const auto& o : in.orders) total_demand += o.quantity;

  model.set_objective(production_cost + transport_cost + holding_cost + shortfall_cost + target_cost);
  model.add_kpi("production_cost", production_cost);
  model.add_kpi("transport_cost", transport_cost);
  model.add_kpi("holding_cost", holding_cost);
  model.add_kpi("shortfall_cost", shortfall_cost);
  model.add_kpi("target_cost", target_cost);
  model.add_kpi("shortfall_qty", shortfall_qty);
  model.add_kpi("service_level", total_demand > 0.0 ? (1.0 / total_demand) * delivered : LinExpr(1.0));
  return f;
}

json plan_to_json(const ProductionPlan& plan) {
  json production = json::array(), shipments = json::array(), inventory = json::array(), deliveries = json::array(),
       shortfall = json::array();
  for (const auto& [k, q] : plan.production) {
    production.push_back({{"plant", std::get<0>(k)}, {"product", std::get<1>(k)}, {"period", std::get<2>(k)}, {"quantity", q}});
  }
  for (const auto& [k, q] : plan.shipments) {
    shipments.push_back({{"from", std::get<0>(k)}, {"to", std::get<1>(k)}, {"product", std::get<2>(k)},
                         {"period", std::get<3>(k)}, {"quantity", q}});
  }
  for (const auto& [k, q] : plan.inventory) {
    inventory.push_back({{"location", std::get<0>(k)}, {"product", std::get<1>(k)}, {"period", std::get<2>(k)}, {"quantity", q}});
  }
  for (const auto& [o, q] : plan.deliveries) deliveries.push_back({{"order", o}, {"quantity", q}});
  for (const auto& [o, q] : plan.shortfall) shortfall.push_back({{"order", o}, {"quantity", q}});
  return {{"production", std::move(production)},
          {"shipments", std::move(shipments)},
          {"inventory", std::move(inventory)},
          {"deliveries", std::move(deliveries)},
          {"shortfall", std::move(shortfall)}};
}

ProductionPlan plan_from_json(const json& doc) {
  try {
    const json& body = doc.contains("plan") ? doc.at("plan") : doc;
    ProductionPlan plan;
    for (const auto& e : body.value("production", json::array())) {
      plan.production[{e.at("plant").get<std::string>(), e.at("product").get<std::string>(), e.at("period").get<int>()}] =
          e.at("quantity").get<double>();
    }
    for (const auto& e : body.value("shipments", json::array())) {
      plan.shipments[{e.at("from").get<std::string>(), e.at("to").get<std::string>(), e.at("product").get<std::string>(),
                      e.at("period").get<int>()}] = e.at("quantity").get<double>();
    }
    for (const auto& e : body.value("inventory", json::array())) {
      plan.inventory[{e.at("location").get<std::string>(), e.at("product").get<std::string>(), e.at("period").get<int>()}] =
          e.at("quantity").get<double>();
    }
    for (const auto& e : body.value("deliveries", json::array())) {
      plan.deliveries[e.at("order").get<std::string>()] = e.at("quantity").get<double>();
    }
    for (const auto& e : body.value("shortfall", json::array())) {
      plan.shortfall[e.at("order").get<std::string>()] = e.at("quantity").get<double>();
    }
    return plan;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed production plan: ") + e.what());
  }
}

ProductionPlan decode_plan(const Formulation& f, const Solution& solution) {
  if (!solution.has_values()) throw SolutionError("cannot decode a plan from a solution without values");
  ProductionPlan plan;
  for (const auto& [k, v] : f.production) plan.production[k] = solution.value(v);
  for (const auto& [k, v] : f.shipments) plan.shipments[k] = solution.value(v);
  for (const auto& [k, v] : f.inventory) plan.inventory[k] = solution.value(v);
  for (const auto& [k, v] : f.deliveries) plan.deliveries[k] = solution.value(v);
  for (const auto& [k, v] : f.shortfall) plan.shortfall[k] = solution.value(v);
  return plan;
}

Solution encode_plan(const Formulation& f, const ProductionPlan& plan) {
  Solution sol;
  sol.status = Status::Feasible;
  sol.values.assign(f.model.num_variables(), 0.0);
  auto put = [&](const auto& vars, const auto& values) {
    for (const auto& [k, v] : vars) {
      auto it = values.find(k);
      if (it != values.end()) sol.values[v.index] = it->second;
    }
  };
  put(f.production, plan.production);
  put(f.shipments, plan.shipments);
  put(f.inventory, plan.inventory);
  put(f.deliveries, plan.deliveries);
  for (const auto& [id, v] : f.shortfall) {
    const Order* o = f.instance.find_order(id);
    auto it = plan.shortfall.find(id);
    const auto dit = plan.deliveries.find(id);
    sol.values[v.index] = it != plan.shortfall.end()
                              ? it->second
                              : o->quantity - (dit != plan.deliveries.end() ? dit->second : 0.0);
  }
  for (const auto& inv : f.instance.inventory) {
    if (!inv.target) continue;
    for (int t = 1; t <= f.instance.periods; ++t) {
      const double level = sol.values[f.inventory.at({inv.location, inv.product, t}).index];
      sol.values[f.target_shortfall.at({inv.location, inv.product, t}).index] = std::max(0.0, *inv.target - level);
    }
  }
  sol.objective_value = evaluate_expr(f.model.objective(), sol);
  return sol;
}

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::FlowImbalance: return "FlowImbalance";
    case ViolationCode::CapacityExceeded: return "CapacityExceeded";
    case ViolationCode::HardOrderShorted: return "HardOrderShorted";
    case ViolationCode::NegativeQuantity: return "NegativeQuantity";
  }
  return "Unknown";
}

std::vector<Violation> validate_plan(const Instance& in, const ProductionPlan& plan, double tol) {
  std::vector<Violation> out;
  auto check_sign = [&](const std::string& subject, double q) {
    if (q < -tol) out.push_back({ViolationCode::NegativeQuantity, subject, -q});
  };
  for (const auto& [k, q] : plan.production) check_sign("prod:" + key(std::get<0>(k), std::get<1>(k), std::get<2>(k)), q);
  for (const auto& [k, q] : plan.shipments) {
    check_sign("ship:" + std::get<0>(k) + ">" + std::get<1>(k) + ":" + std::get<2>(k) + ":" + std::to_string(std::get<3>(k)), q);
  }
  for (const auto& [k, q] : plan.inventory) check_sign("inv:" + key(std::get<0>(k), std::get<1>(k), std::get<2>(k)), q);
  for (const auto& [o, q] : plan.deliveries) check_sign("deliver:" + o, q);

  // Net position per (location, product, t): stock_{t-1} + in - out - stock_t must be zero.
  std::map<PlantProductPeriod, double> net;
  auto get = [](const auto& m, const auto& k) {
    auto it = m.find(k);
    return it == m.end() ? 0.0 : it->second;
  };
  std::map<std::pair<std::string, std::string>, double> initial;
  for (const auto& inv : in.inventory) initial[{inv.location, inv.product}] = inv.initial_stock;
  for (const auto& l : in.locations) {
    for (const auto& p : in.products) {
      for (int t = 1; t <= in.periods; ++t) {
        const double prev = t == 1 ? get(initial, std::pair{l.id, p}) : get(plan.inventory, PlantProductPeriod{l.id, p, t - 1});
        net[{l.id, p, t}] = prev + get(plan.production, PlantProductPeriod{l.id, p, t}) -
                            get(plan.inventory, PlantProductPeriod{l.id, p, t});
      }
    }
  }
  for (const auto& [k, q] : plan.shipments) {
    const auto& [from, to, p, t] = k;
    net[{from, p, t}] -= q;
    net[{to, p, t}] += q;
  }
  for (const auto& o : in.orders) net[{o.customer, o.product, o.due}] -= get(plan.deliveries, o.id);
  for (const auto& [k, v] : net) {
    if (std::abs(v) > tol) {
      out.push_back({ViolationCode::FlowImbalance, "balance:" + key(std::get<0>(k), std::get<1>(k), std::get<2>(k)), std::abs(v)});
    }
  }

  std::map<std::pair<std::string, std::string>, double> cap;
  for (const auto& c : in.capabilities) cap[{c.plant, c.product}] = c.capacity;
  for (const auto& [k, q] : plan.production) {
    const auto& [plant, product, t] = k;
    auto it = cap.find({plant, product});
    const double limit = it == cap.end() ? 0.0 : it->second;
    if (q > limit + tol) out.push_back({ViolationCode::CapacityExceeded, "prodcap:" + key(plant, product, t), q - limit});
  }
  for (const auto& lane : in.lanes) {
    for (int t = 1; t <= in.periods; ++t) {
      double flow = 0.0;
      for (const auto& p : in.products) flow += get(plan.shipments, LaneProductPeriod{lane.from, lane.to, p, t});
      if (flow > lane.capacity + tol) {
        out.push_back({ViolationCode::CapacityExceeded, "lanecap:" + lane.from + ">" + lane.to + ":" + std::to_string(t),
                       flow - lane.capacity});
      }
    }
  }
  for (const auto& o : in.orders) {
    if (!in.is_hard(o)) continue;
    const double got = get(plan.deliveries, o.id);
    if (got < o.quantity - tol) out.push_back({ViolationCode::HardOrderShorted, o.id, o.quantity - got});
  }
  return out;
}

}  // namespace recover::production
