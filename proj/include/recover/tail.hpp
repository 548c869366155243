#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "recover/model.hpp"

namespace recover::tail {

struct Flight {
  std::string id;
  std::string origin;
  std::string destination;
  int dep = 0;  // minutes from horizon start
  int arr = 0;
  bool loop = false;  // origin == destination allowed only when set

  bool operator==(const Flight&) const = default;
};

struct Window {
  int from = 0;
  int to = 0;
  bool operator==(const Window&) const = default;
};

struct Aircraft {
  std::string id;
  std::string initial_airport;
  std::optional<int> turn_time;
  std::vector<Window> unavailable;

  bool operator==(const Aircraft&) const = default;
};

struct Costs {
  double cancellation = 10000.0;  // relax penalty on coverage
  double aircraft_use = 0.0;      // per aircraft leaving its source
  bool operator==(const Costs&) const = default;
};

struct Timetable {
  std::vector<Flight> flights;
  std::vector<Aircraft> aircraft;
  int default_turn_time = 0;
  Costs costs;

  const Flight* find_flight(std::string_view id) const;
  const Aircraft* find_aircraft(std::string_view id) const;
  int turn_time(const Aircraft& a) const { return a.turn_time.value_or(default_turn_time); }

  // Throws InputError on duplicate ids, dep >= arr, unflagged loops, negative turn times.
  void validate() const;

  bool operator==(const Timetable&) const = default;
};

Timetable timetable_from_json(const nlohmann::json& doc);
nlohmann::json timetable_to_json(const Timetable& tt);

// C1 + C3: same airport and turn time respected.
bool connects(const Timetable& tt, const Aircraft& a, const Flight& from, const Flight& to);
// C2: first flight leaves from the initial position.
bool can_start(const Aircraft& a, const Flight& f);
// Flight does not overlap any unavailability window of the aircraft.
bool available(const Aircraft& a, const Flight& f);

struct Arc {
  std::size_t aircraft = 0;
  std::optional<std::size_t> from;  // nullopt: source arc
  std::size_t to = 0;
  double cost = 0.0;
};

using ArcCostFn = std::function<double(const Timetable&, const Aircraft&, const Flight* from, const Flight& to)>;

// Idle ground minutes between ready time and next departure; source arcs cost 0.
double idle_ground_cost(const Timetable& tt, const Aircraft& a, const Flight* from, const Flight& to);

struct ConnectionGraph {
  std::vector<Arc> arcs;
};

ConnectionGraph build_connection_graph(const Timetable& tt, const ArcCostFn& cost = idle_ground_cost);

std::string arc_name(const Timetable& tt, const Arc& arc);

struct Formulation {
  Timetable timetable;
  ConnectionGraph graph;
  Model model;
  std::vector<VarId> arc_var;  // parallel to graph.arcs
};

/// Binary arc-flow model: coverage (relaxable), single entry per flight, flow
/// conservation, one source arc per aircraft.
Formulation formulate_mip(const Timetable& tt, const ArcCostFn& cost = idle_ground_cost);

struct TailPlan {
  std::map<std::string, std::vector<std::string>> routes;  // aircraft id -> flight ids
  std::vector<std::string> uncovered;

  bool operator==(const TailPlan&) const = default;
};

nlohmann::json plan_to_json(const TailPlan& plan);
TailPlan plan_from_json(const nlohmann::json& doc);

// Follows chosen arcs from each source. Throws SolutionError on fractional
// values, branching routes, or used arcs not reachable from a source.
TailPlan decode_plan(const Formulation& f, const Solution& solution, double int_tol = kDefaultIntegralityTol);

// Arc values for a plan. Throws InputError when a route step has no arc.
Solution encode_plan(const Formulation& f, const TailPlan& plan);

enum class ViolationCode {
  TurnTimeViolation,
  WrongInitialPosition,
  ContinuityBreak,
  FlightUncovered,
  FlightDoubleCovered,
  AircraftUnavailable,
  FlightCancelled,
};

std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::string aircraft;              // empty for coverage codes
  std::vector<std::string> flights;  // offending flight(s)
  bool operator==(const Violation&) const = default;
};

// Empty iff the plan satisfies C1-C3, availability, and covers every flight once.
std::vector<Violation> validate_plan(const Timetable& tt, const TailPlan& plan);

// Incumbent routes cut at the first step the timetable no longer supports;
// cancelled flights are skipped. The result validates except for coverage.
TailPlan project_plan(const Timetable& tt, const TailPlan& incumbent);

}  // namespace recover::tail
