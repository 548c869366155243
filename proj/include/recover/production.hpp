#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "recover/model.hpp"

namespace recover::production {

enum class LocationKind { Supplier, Plant, Customer };

struct Location {
  std::string id;
  LocationKind kind = LocationKind::Plant;
  bool operator==(const Location&) const = default;
};

struct Lane {
  std::string from;
  std::string to;
  double unit_cost = 0.0;
  double capacity = kInf;  // per period, summed over products
  bool operator==(const Lane&) const = default;
};

struct Capability {
  std::string plant;
  std::string product;
  double unit_cost = 0.0;
  double capacity = kInf;  // per period
  bool operator==(const Capability&) const = default;
};

// Inventory is only held at (location, product) pairs listed here.
struct InventoryParams {
  std::string location;
  std::string product;
  double holding_cost = 0.0;
  double initial_stock = 0.0;
  std::optional<double> target;
  double target_penalty = 0.0;  // per unit below target, per period
  bool operator==(const InventoryParams&) const = default;
};

struct Order {
  std::string id;
  std::string customer;
  std::string product;
  int due = 1;
  double quantity = 0.0;
  int priority = 0;
  bool operator==(const Order&) const = default;
};

struct Instance {
  std::vector<std::string> products;
  std::vector<Location> locations;
  std::vector<Lane> lanes;
  std::vector<Capability> capabilities;
  std::vector<InventoryParams> inventory;
  std::vector<Order> orders;
  int periods = 1;
  int priority_threshold = 0;        // priority >= threshold: fulfillment is hard
  double hard_order_penalty = 1000;  // relax penalty on hard fulfillment
  double shortfall_penalty = 100;    // per unit short on soft orders
  bool integral_production = false;

  bool is_hard(const Order& o) const { return o.priority >= priority_threshold; }
  const Location* find_location(std::string_view id) const;
  const Order* find_order(std::string_view id) const;

  // Throws InputError on dangling references, negative capacities, T < 1, bad due periods.
  void validate() const;

  bool operator==(const Instance&) const = default;
};

Order order_from_json(const nlohmann::json& doc);
nlohmann::json order_to_json(const Order& order);

Instance instance_from_json(const nlohmann::json& doc);
nlohmann::json instance_to_json(const Instance& instance);

using PlantProductPeriod = std::tuple<std::string, std::string, int>;
using LaneProductPeriod = std::tuple<std::string, std::string, std::string, int>;  // from, to, product, t

struct Formulation {
  Instance instance;
  Model model;
  std::map<PlantProductPeriod, VarId> production;
  std::map<LaneProductPeriod, VarId> shipments;
  std::map<PlantProductPeriod, VarId> inventory;  // (location, product, t)
  std::map<PlantProductPeriod, VarId> target_shortfall;
  std::map<std::string, VarId> deliveries;
  std::map<std::string, VarId> shortfall;  // soft orders only
};

Formulation formulate_model(const Instance& instance);

struct ProductionPlan {
  std::map<PlantProductPeriod, double> production;
  std::map<LaneProductPeriod, double> shipments;
  std::map<PlantProductPeriod, double> inventory;
  std::map<std::string, double> deliveries;
  std::map<std::string, double> shortfall;

  bool operator==(const ProductionPlan&) const = default;
};

nlohmann::json plan_to_json(const ProductionPlan& plan);
ProductionPlan plan_from_json(const nlohmann::json& doc);

ProductionPlan decode_plan(const Formulation& f, const Solution& solution);
// Values every formulation variable; target shortfall is derived from inventory.
Solution encode_plan(const Formulation& f, const ProductionPlan& plan);

enum class ViolationCode { FlowImbalance, CapacityExceeded, HardOrderShorted, NegativeQuantity };

std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::string subject;
  double amount = 0.0;
};

std::vector<Violation> validate_plan(const Instance& instance, const ProductionPlan& plan, double tol = 1e-6);

}  // namespace recover::production
