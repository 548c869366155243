#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "recover/production.hpp"
#include "recover/tail.hpp"

namespace recover {

struct FlightDelay {
  std::string flight;
  int dep = 0;
  int arr = 0;
  bool operator==(const FlightDelay&) const = default;
};

struct FlightCancellation {
  std::string flight;
  bool operator==(const FlightCancellation&) const = default;
};

struct AircraftUnavailability {
  std::string aircraft;
  int from = 0;
  int to = 0;
  bool operator==(const AircraftUnavailability&) const = default;
};

struct PriorityChange {
  std::string customer;
  int priority = 0;
  bool operator==(const PriorityChange&) const = default;
};

struct NewOrder {
  production::Order order;
  bool operator==(const NewOrder&) const = default;
};

using Event = std::variant<FlightDelay, FlightCancellation, AircraftUnavailability, PriorityChange, NewOrder>;

std::string event_type(const Event& e);

struct Scenario {
  std::string id;
  std::vector<Event> events;
  double weight = 1.0;
  bool operator==(const Scenario&) const = default;
};

Scenario scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const Scenario& s);
// Accepts either a bare array or {"scenarios": [...]}; ids must be unique.
std::vector<Scenario> scenario_set_from_json(const nlohmann::json& doc);
nlohmann::json scenario_set_to_json(const std::vector<Scenario>& set);

// Events apply in order; the input is never modified. Unknown ids, events of the
// other domain, or bad times throw InputError.
tail::Timetable apply_scenario(const tail::Timetable& tt, const Scenario& s);
production::Instance apply_scenario(const production::Instance& in, const Scenario& s);

// Conflicts, diff lines and freeze notes share one record shape.
struct ChangeRecord {
  std::string kind;
  std::string subject;
  std::string detail;
  bool operator==(const ChangeRecord&) const = default;
};

nlohmann::json records_to_json(const std::vector<ChangeRecord>& records);
std::vector<ChangeRecord> records_from_json(const nlohmann::json& doc);

// Domain validation of the incumbent against the perturbed instance; model-level
// breaches follow only when the domain check finds nothing.
std::vector<ChangeRecord> detect_conflicts(const tail::Timetable& perturbed, const tail::TailPlan& incumbent);
std::vector<ChangeRecord> detect_conflicts(const production::Instance& perturbed,
                                           const production::ProductionPlan& incumbent);

std::vector<ChangeRecord> render_diff(const tail::TailPlan& incumbent, const tail::TailPlan& repaired);
std::vector<ChangeRecord> render_diff(const production::ProductionPlan& incumbent,
                                      const production::ProductionPlan& repaired, double tol = 1e-6);

}  // namespace recover
