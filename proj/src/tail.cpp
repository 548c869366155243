#include "recover/tail.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "recover/error.hpp"

namespace recover::tail {

using nlohmann::json;

const Flight* Timetable::find_flight(std::string_view id) const {
  for (const auto& f : flights) {
    if (f.id == id) return &f;
  }
  return nullptr;
}

const Aircraft* Timetable::find_aircraft(std::string_view id) const {
  for (const auto& a : aircraft) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

void Timetable::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& f : flights) {
    if (!seen.insert(f.id).second) throw InputError("duplicate flight id '" + f.id + "'");
    if (f.dep >= f.arr) throw InputError("flight '" + f.id + "' must depart before it arrives");
    if (f.origin == f.destination && !f.loop) {
      throw InputError("flight '" + f.id + "' has origin == destination but is not flagged as a loop");
    }
  }
  seen.clear();
  for (const auto& a : aircraft) {
    if (!seen.insert(a.id).second) throw InputError("duplicate aircraft id '" + a.id + "'");
    if (turn_time(a) < 0) throw InputError("aircraft '" + a.id + "' has a negative turn time");
  }
  if (default_turn_time < 0) throw InputError("default_turn_time must be >= 0");
  if (!(costs.cancellation >= 0.0) || !(costs.aircraft_use >= 0.0)) throw InputError("costs must be >= 0");
}

Timetable timetable_from_json(const json& doc) {
  try {
    Timetable tt;
    tt.default_turn_time = doc.value("default_turn_time", 0);
    for (const auto& a : doc.at("aircraft")) {
      Aircraft ac{a.at("id").get<std::string>(), a.at("initial_airport").get<std::string>(), std::nullopt, {}};
      if (a.contains("turn_time") && !a["turn_time"].is_null()) ac.turn_time = a["turn_time"].get<int>();
      if (a.contains("unavailable")) {
        for (const auto& w : a["unavailable"]) ac.unavailable.push_back({w.at("from").get<int>(), w.at("to").get<int>()});
      }
      tt.aircraft.push_back(std::move(ac));
    }
    for (const auto& f : doc.at("flights")) {
      tt.flights.push_back({f.at("id").get<std::string>(), f.at("origin").get<std::string>(),
                            f.at("destination").get<std::string>(), f.at("dep").get<int>(), f.at("arr").get<int>(),
                            f.value("loop", false)});
    }
    if (doc.contains("costs")) {
      tt.costs.cancellation = doc["costs"].value("cancellation", tt.costs.cancellation);
      tt.costs.aircraft_use = doc["costs"].value("aircraft_use", tt.costs.aircraft_use);
    }
    tt.validate();
    return tt;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed timetable: ") + e.what());
  }
}

json timetable_to_json(const Timetable& tt) {
  json aircraft = json::array();
  for (const auto& a : tt.aircraft) {
    json entry = {{"id", a.id}, {"initial_airport", a.initial_airport}};
    if (a.turn_time) entry["turn_time"] = *a.turn_time;
    if (!a.unavailable.empty()) {
      json windows = json::array();
      for (const auto& w : a.unavailable) windows.push_back({{"from", w.from}, {"to", w.to}});
      entry["unavailable"] = std::move(windows);
    }
    aircraft.push_back(std::move(entry));
  }
  json flights = json::array();
  for (const auto& f : tt.flights) {
    json entry = {{"id", f.id}, {"origin", f.origin}, {"destination", f.destination}, {"dep", f.dep}, {"arr", f.arr}};
    if (f.loop) entry["loop"] = true;
    flights.push_back(std::move(entry));
  }
  return {{"default_turn_time", tt.default_turn_time},
          {"aircraft", std::move(aircraft)},
          {"flights", std::move(flights)},
          {"costs", {{"cancellation", tt.costs.cancellation}, {"aircraft_use", tt.costs.aircraft_use}}}};
}

bool connects(const Timetable& tt, const Aircraft& a, const Flight& from, const Flight& to) {
  return &from != &to && from.id != to.id && from.destination == to.origin &&
         from.arr + tt.turn_time(a) <= to.dep;
}

bool can_start(const Aircraft& a, const Flight& f) { return f.origin == a.initial_airport; }

bool available(const Aircraft& a, const Flight& f) {
  return std::none_of(a.unavailable.begin(), a.unavailable.end(),
                      [&](const Window& w) { return f.dep < w.to && f.arr > w.from; });
}

double idle_ground_cost(const Timetable& tt, const Aircraft& a, const Flight* from, const Flight& to) {
  if (from == nullptr) return 0.0;
  return static_cast<double>(to.dep - (from->arr + tt.turn_time(a)));
}

ConnectionGraph build_connection_graph(const Timetable& tt, const ArcCostFn& cost) {
  ConnectionGraph g;
  const auto& flights = tt.flights;
  for (std::size_t ai = 0; ai < tt.aircraft.size(); ++ai) {
    const auto& a = tt.aircraft[ai];
    for (std::size_t j = 0; j < flights.size(); ++j) {
      if (can_start(a, flights[j]) && available(a, flights[j])) {
        g.arcs.push_back({ai, std::nullopt, j, cost(tt, a, nullptr, flights[j])});
      }
    }
    for (std::size_t i = 0; i < flights.size(); ++i) {
      if (!available(a, flights[i])) continue;
      for (std::size_t j = 0; j < flights.size(); ++j) {
        if (i == j || !available(a, flights[j])) continue;
        if (connects(tt, a, flights[i], flights[j])) {
          g.arcs.push_back({ai, i, j, cost(tt, a, &flights[i], flights[j])});
        }
      }
    }
  }
  return g;
}

std::string arc_name(const Timetable& tt, const Arc& arc) {
  const std::string from = arc.from ? tt.flights[*arc.from].id : std::string("src");
  return "y:" + tt.aircraft[arc.aircraft].id + ":" + from + ">" + tt.flights[arc.to].id;
}

Formulation formulate_mip(const Timetable& tt, const ArcCostFn& cost) {
  tt.validate();
  Formulation f{tt, build_connection_graph(tt, cost), Model{}, {}};
  auto& model = f.model;
  const std::size_t nf = tt.flights.size();
  const std::size_t na = tt.aircraft.size();

  std::vector<LinExpr> inflow(nf);
  std::vector<std::vector<LinExpr>> in_by_aircraft(na, std::vector<LinExpr>(nf));
  std::vector<std::vector<LinExpr>> out_by_aircraft(na, std::vector<LinExpr>(nf));
  std::vector<LinExpr> sources(na);
  LinExpr route_cost, all_sources, all_arcs;

  for (const auto& arc : f.graph.arcs) {
    const auto var = model.add_variable({arc_name(tt, arc), VarKind::Binary, 0.0, 1.0,
                                         static_cast<double>(tt.flights[arc.to].dep)});
    f.arc_var.push_back(var);
    inflow[arc.to].add(1.0, var);
    in_by_aircraft[arc.aircraft][arc.to].add(1.0, var);
    if (arc.from) {
      out_by_aircraft[arc.aircraft][*arc.from].add(1.0, var);
    } else {
      sources[arc.aircraft].add(1.0, var);
      all_sources.add(1.0, var);
    }
    route_cost.add(arc.cost, var);
    all_arcs.add(1.0, var);
  }

  for (std::size_t j = 0; j < nf; ++j) {
    const auto& id = tt.flights[j].id;
    model.add_constraint({"cover:" + id, inflow[j], Sense::Equal, 1.0, tt.costs.cancellation});
    model.add_constraint({"once:" + id, inflow[j], Sense::LessEqual, 1.0, std::nullopt});
  }
  for (std::size_t ai = 0; ai < na; ++ai) {
    for (std::size_t j = 0; j < nf; ++j) {
      if (out_by_aircraft[ai][j].empty()) continue;
      model.add_constraint({"flow:" + tt.aircraft[ai].id + ":" + tt.flights[j].id,
                            out_by_aircraft[ai][j] - in_by_aircraft[ai][j], Sense::LessEqual, 0.0, std::nullopt});
    }
    if (!sources[ai].empty()) {
      model.add_constraint({"start:" + tt.aircraft[ai].id, sources[ai], Sense::LessEqual, 1.0, std::nullopt});
    }
  }

  model.set_objective(route_cost + tt.costs.aircraft_use * all_sources);
  model.add_kpi("route_cost", route_cost);
  model.add_kpi("aircraft_used", all_sources);
  model.add_kpi("flights_uncovered", LinExpr(static_cast<double>(nf)) - all_arcs);
  return f;
}

json plan_to_json(const TailPlan& plan) {
  json routes = json::object();
  for (const auto& [ac, flights] : plan.routes) routes[ac] = flights;
  return {{"routes", std::move(routes)}, {"uncovered", plan.uncovered}};
}

TailPlan plan_from_json(const json& doc) {
  try {
    const json& body = doc.contains("plan") ? doc.at("plan") : doc;
    TailPlan plan;
    for (const auto& [ac, flights] : body.at("routes").items()) {
      plan.routes[ac] = flights.get<std::vector<std::string>>();
    }
    if (body.contains("uncovered")) plan.uncovered = body["uncovered"].get<std::vector<std::string>>();
    return plan;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed tail plan: ") + e.what());
  }
}

TailPlan decode_plan(const Formulation& f, const Solution& solution, double int_tol) {
  if (!solution.has_values()) throw SolutionError("cannot decode a plan from a solution without values");
  const auto& tt = f.timetable;
  const auto& arcs = f.graph.arcs;
  std::vector<bool> used(arcs.size(), false);
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    const double v = solution.value(f.arc_var[k]);
    if (std::abs(v - std::round(v)) > int_tol) {
      throw SolutionError("arc " + arc_name(tt, arcs[k]) + " has fractional value " + std::to_string(v));
    }
    used[k] = std::round(v) >= 1.0;
  }

  TailPlan plan;
  std::vector<bool> visited(arcs.size(), false);
  std::vector<int> cover(tt.flights.size(), 0);
  for (std::size_t ai = 0; ai < tt.aircraft.size(); ++ai) {
    auto& route = plan.routes[tt.aircraft[ai].id];
    std::optional<std::size_t> start;
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      if (!used[k] || arcs[k].aircraft != ai || arcs[k].from) continue;
      if (start) throw SolutionError("aircraft " + tt.aircraft[ai].id + " leaves its source twice");
      start = k;
    }
    std::optional<std::size_t> current = start;
    while (current) {
      visited[*current] = true;
      const std::size_t flight = arcs[*current].to;
      route.push_back(tt.flights[flight].id);
      ++cover[flight];
      std::optional<std::size_t> next;
      for (std::size_t k = 0; k < arcs.size(); ++k) {
        if (!used[k] || arcs[k].aircraft != ai || arcs[k].from != flight) continue;
        if (next) throw SolutionError("aircraft " + tt.aircraft[ai].id + " branches after " + tt.flights[flight].id);
        next = k;
      }
      current = next;
    }
  }
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    if (used[k] && !visited[k]) throw SolutionError("broken chain: arc " + arc_name(tt, arcs[k]) + " is not on a route");
  }
  for (std::size_t j = 0; j < tt.flights.size(); ++j) {
    if (cover[j] > 1) throw SolutionError("flight " + tt.flights[j].id + " is covered twice");
    if (cover[j] == 0) plan.uncovered.push_back(tt.flights[j].id);
  }
  return plan;
}

Solution encode_plan(const Formulation& f, const TailPlan& plan) {
  const auto& tt = f.timetable;
  std::unordered_map<std::string, std::size_t> by_name;
  for (std::size_t k = 0; k < f.graph.arcs.size(); ++k) by_name.emplace(arc_name(tt, f.graph.arcs[k]), k);

  Solution sol;
  sol.status = Status::Feasible;
  sol.values.assign(f.model.num_variables(), 0.0);
  for (const auto& [ac, flights] : plan.routes) {
    std::string prev = "src";
    for (const auto& fl : flights) {
      const std::string name = "y:" + ac + ":" + prev + ">" + fl;
      auto it = by_name.find(name);
      if (it == by_name.end()) throw InputError("plan step " + name + " is not a connection in the timetable");
      sol.values[f.arc_var[it->second].index] = 1.0;
      prev = fl;
    }
  }
  sol.objective_value = evaluate_expr(f.model.objective(), sol);
  return sol;
}

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::TurnTimeViolation: return "TurnTimeViolation";
    case ViolationCode::WrongInitialPosition: return "WrongInitialPosition";
    case ViolationCode::ContinuityBreak: return "ContinuityBreak";
    case ViolationCode::FlightUncovered: return "FlightUncovered";
    case ViolationCode::FlightDoubleCovered: return "FlightDoubleCovered";
    case ViolationCode::AircraftUnavailable: return "AircraftUnavailable";
    case ViolationCode::FlightCancelled: return "FlightCancelled";
  }
  return "Unknown";
}

std::vector<Violation> validate_plan(const Timetable& tt, const TailPlan& plan) {
  std::vector<Violation> out;
  std::map<std::string, int> cover;
  for (const auto& f : tt.flights) cover[f.id] = 0;

  for (const auto& [ac_id, route] : plan.routes) {
    const Aircraft* ac = tt.find_aircraft(ac_id);
    if (ac == nullptr) throw InputError("plan references unknown aircraft '" + ac_id + "'");
    const Flight* prev = nullptr;
    for (const auto& fid : route) {
      const Flight* f = tt.find_flight(fid);
      if (f == nullptr) throw InputError("plan references unknown flight '" + fid + "'");
      ++cover[fid];
      if (!available(*ac, *f)) out.push_back({ViolationCode::AircraftUnavailable, ac_id, {fid}});
      if (prev == nullptr) {
        if (!can_start(*ac, *f)) out.push_back({ViolationCode::WrongInitialPosition, ac_id, {fid}});
      } else if (prev->destination != f->origin) {
        out.push_back({ViolationCode::ContinuityBreak, ac_id, {prev->id, fid}});
      } else if (prev->arr + tt.turn_time(*ac) > f->dep) {
        out.push_back({ViolationCode::TurnTimeViolation, ac_id, {prev->id, fid}});
      }
      prev = f;
    }
  }
  for (const auto& fid : plan.uncovered) {
    if (tt.find_flight(fid) == nullptr) throw InputError("plan references unknown flight '" + fid + "'");
  }
  for (const auto& f : tt.flights) {
    if (cover[f.id] == 0) out.push_back({ViolationCode::FlightUncovered, "", {f.id}});
    if (cover[f.id] > 1) out.push_back({ViolationCode::FlightDoubleCovered, "", {f.id}});
  }
  return out;
}

TailPlan project_plan(const Timetable& tt, const TailPlan& incumbent) {
  TailPlan out;
  std::set<std::string> covered;
  for (const auto& ac : tt.aircraft) {
    auto& route = out.routes[ac.id];
    auto it = incumbent.routes.find(ac.id);
    if (it == incumbent.routes.end()) continue;
    const Flight* prev = nullptr;
    for (const auto& fid : it->second) {
      const Flight* f = tt.find_flight(fid);
      if (f == nullptr) continue;  // cancelled
      const bool ok = available(ac, *f) && !covered.contains(fid) &&
                      (prev == nullptr ? can_start(ac, *f) : connects(tt, ac, *prev, *f));
      if (!ok) break;
      route.push_back(fid);
      covered.insert(fid);
      prev = f;
    }
  }
  for (const auto& f : tt.flights) {
    if (!covered.contains(f.id)) out.uncovered.push_back(f.id);
  }
  return out;
}

}  // namespace recover::tail
