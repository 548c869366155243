#include "recover/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "recover/error.hpp"

namespace recover {

using nlohmann::json;

namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string join(const std::vector<std::string>& items, const char* sep = " ") {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

Event event_from_json(const json& e) {
  const auto type = e.at("type").get<std::string>();
  if (type == "FlightDelay") {
    return FlightDelay{e.at("flight").get<std::string>(), e.at("dep").get<int>(), e.at("arr").get<int>()};
  }
  if (type == "FlightCancellation") return FlightCancellation{e.at("flight").get<std::string>()};
  if (type == "AircraftUnavailability") {
    return AircraftUnavailability{e.at("aircraft").get<std::string>(), e.at("from").get<int>(), e.at("to").get<int>()};
  }
  if (type == "PriorityChange") return PriorityChange{e.at("customer").get<std::string>(), e.at("priority").get<int>()};
  if (type == "NewOrder") return NewOrder{production::order_from_json(e.at("order"))};
  throw InputError("unknown event type '" + type + "'");
}

json event_to_json(const Event& ev) {
  json out = std::visit(
      overloaded{
          [](const FlightDelay& e) { return json{{"flight", e.flight}, {"dep", e.dep}, {"arr", e.arr}}; },
          [](const FlightCancellation& e) { return json{{"flight", e.flight}}; },
          [](const AircraftUnavailability& e) {
            return json{{"aircraft", e.aircraft}, {"from", e.from}, {"to", e.to}};
          },
          [](const PriorityChange& e) { return json{{"customer", e.customer}, {"priority", e.priority}}; },
          [](const NewOrder& e) { return json{{"order", production::order_to_json(e.order)}}; },
      },
      ev);
  out["type"] = event_type(ev);
  return out;
}

[[noreturn]] void wrong_domain(const Event& e, const char* domain) {
  throw InputError("event " + event_type(e) + " does not apply to the " + domain + " domain");
}

}  // namespace

std::string event_type(const Event& e) {
  static const char* names[] = {"FlightDelay", "FlightCancellation", "AircraftUnavailability", "PriorityChange",
                                "NewOrder"};
  return names[e.index()];
}

Scenario scenario_from_json(const json& doc) {
  try {
    Scenario s;
    s.id = doc.value("id", std::string());
    s.weight = doc.value("weight", 1.0);
    if (!std::isfinite(s.weight) || s.weight < 0.0) throw InputError("scenario weight must be finite and >= 0");
    for (const auto& e : doc.value("events", json::array())) s.events.push_back(event_from_json(e));
    return s;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed scenario: ") + e.what());
  }
}

json scenario_to_json(const Scenario& s) {
  json events = json::array();
  for (const auto& e : s.events) events.push_back(event_to_json(e));
  return {{"id", s.id}, {"weight", s.weight}, {"events", std::move(events)}};
}

std::vector<Scenario> scenario_set_from_json(const json& doc) {
  const json& list = doc.is_object() && doc.contains("scenarios") ? doc.at("scenarios") : doc;
  if (!list.is_array()) throw InputError("scenario set must be an array");
  std::vector<Scenario> out;
  std::set<std::string> ids;
  for (const auto& s : list) {
    out.push_back(scenario_from_json(s));
    if (!ids.insert(out.back().id).second) throw InputError("duplicate scenario id '" + out.back().id + "'");
  }
  return out;
}

json scenario_set_to_json(const std::vector<Scenario>& set) {
  json list = json::array();
  for (const auto& s : set) list.push_back(scenario_to_json(s));
  return {{"scenarios", std::move(list)}};
}

tail::Timetable apply_scenario(const tail::Timetable& tt, const Scenario& s) {
  tail::Timetable out = tt;
  for (const auto& ev : s.events) {
    std::visit(overloaded{
                   [&](const FlightDelay& e) {
                     auto it = std::find_if(out.flights.begin(), out.flights.end(),
                                            [&](const auto& f) { return f.id == e.flight; });
                     if (it == out.flights.end()) throw InputError("delay of unknown flight '" + e.flight + "'");
                     if (e.dep >= e.arr) throw InputError("delay of '" + e.flight + "' needs dep < arr");
                     it->dep = e.dep;
                     it->arr = e.arr;
                   },
                   [&](const FlightCancellation& e) {
                     auto it = std::find_if(out.flights.begin(), out.flights.end(),
                                            [&](const auto& f) { return f.id == e.flight; });
                     if (it == out.flights.end()) throw InputError("cancellation of unknown flight '" + e.flight + "'");
                     out.flights.erase(it);
                   },
                   [&](const AircraftUnavailability& e) {
                     auto it = std::find_if(out.aircraft.begin(), out.aircraft.end(),
                                            [&](const auto& a) { return a.id == e.aircraft; });
                     if (it == out.aircraft.end()) throw InputError("unknown aircraft '" + e.aircraft + "'");
                     if (e.from >= e.to) throw InputError("unavailability window needs from < to");
                     it->unavailable.push_back({e.from, e.to});
                   },
                   [&](const auto&) { wrong_domain(ev, "tail"); },
               },
               ev);
  }
  out.validate();
  return out;
}

production::Instance apply_scenario(const production::Instance& in, const Scenario& s) {
  production::Instance out = in;
  for (const auto& ev : s.events) {
    std::visit(overloaded{
                   [&](const PriorityChange& e) {
                     const auto* loc = out.find_location(e.customer);
                     if (loc == nullptr || loc->kind != production::LocationKind::Customer) {
                       throw InputError("priority change for unknown customer '" + e.customer + "'");
                     }
                     for (auto& o : out.orders) {
                       if (o.customer == e.customer) o.priority = e.priority;
                     }
                   },
                   [&](const NewOrder& e) {
                     out.orders.push_back(e.order);
                     out.validate();
                   },
                   [&](const auto&) { wrong_domain(ev, "production"); },
               },
               ev);
  }
  out.validate();
  return out;
}

json records_to_json(const std::vector<ChangeRecord>& records) {
  json out = json::array();
  for (const auto& r : records) out.push_back({{"kind", r.kind}, {"subject", r.subject}, {"detail", r.detail}});
  return out;
}

std::vector<ChangeRecord> records_from_json(const json& doc) {
  std::vector<ChangeRecord> out;
  for (const auto& r : doc) {
    out.push_back({r.at("kind").get<std::string>(), r.at("subject").get<std::string>(),
                   r.value("detail", std::string())});
  }
  return out;
}

namespace {

void append_breaches(const Model& model, const Solution& sol, std::vector<ChangeRecord>& out) {
  for (const auto& b : check_feasible(model, sol, kDefaultFeasibilityTol)) {
    std::string kind = b.kind == Breach::Kind::Constraint ? "ConstraintViolation"
                       : b.kind == Breach::Kind::Bound    ? "BoundViolation"
                                                          : "IntegralityViolation";
    out.push_back({kind, b.name, fmt(b.amount)});
  }
}

}  // namespace

std::vector<ChangeRecord> detect_conflicts(const tail::Timetable& tt, const tail::TailPlan& incumbent) {
  std::vector<ChangeRecord> out;
  tail::TailPlan kept;
  for (const auto& [ac, route] : incumbent.routes) {
    auto& r = kept.routes[ac];
    for (const auto& f : route) {
      if (tt.find_flight(f) == nullptr) {
        out.push_back({std::string(to_string(tail::ViolationCode::FlightCancelled)), ac, f});
      } else {
        r.push_back(f);
      }
    }
  }
  for (const auto& f : incumbent.uncovered) {
    if (tt.find_flight(f) != nullptr) kept.uncovered.push_back(f);
  }
  for (const auto& v : tail::validate_plan(tt, kept)) {
    out.push_back({std::string(to_string(v.code)), v.aircraft, join(v.flights, ",")});
  }
  if (out.empty()) {
    const auto f = tail::formulate_mip(tt);
    append_breaches(f.model, tail::encode_plan(f, kept), out);
  }
  return out;
}

std::vector<ChangeRecord> detect_conflicts(const production::Instance& in, const production::ProductionPlan& incumbent) {
  std::vector<ChangeRecord> out;
  for (const auto& v : production::validate_plan(in, incumbent)) {
    out.push_back({std::string(to_string(v.code)), v.subject, fmt(v.amount)});
  }
  if (out.empty()) {
    const auto f = production::formulate_model(in);
    append_breaches(f.model, production::encode_plan(f, incumbent), out);
  }
  return out;
}

std::vector<ChangeRecord> render_diff(const tail::TailPlan& incumbent, const tail::TailPlan& repaired) {
  std::vector<ChangeRecord> out;
  std::set<std::string> aircraft;
  for (const auto& [ac, r] : incumbent.routes) aircraft.insert(ac);
  for (const auto& [ac, r] : repaired.routes) aircraft.insert(ac);
  auto route = [](const tail::TailPlan& p, const std::string& ac) {
    auto it = p.routes.find(ac);
    return it == p.routes.end() ? std::vector<std::string>{} : it->second;
  };
  for (const auto& ac : aircraft) {
    const auto before = route(incumbent, ac), after = route(repaired, ac);
    if (before != after) {
      out.push_back({"RouteChanged", ac, "[" + join(before) + "] -> [" + join(after) + "]"});
    }
  }
  auto flown = [](const tail::TailPlan& p) {
    std::set<std::string> s;
    for (const auto& [ac, r] : p.routes) s.insert(r.begin(), r.end());
    return s;
  };
  const auto was = flown(incumbent), now = flown(repaired);
  for (const auto& f : was) {
    if (!now.contains(f)) out.push_back({"Cancelled", f, ""});
  }
  for (const auto& f : now) {
    if (!was.contains(f)) out.push_back({"Restored", f, ""});
  }
  return out;
}

std::vector<ChangeRecord> render_diff(const production::ProductionPlan& incumbent,
                                      const production::ProductionPlan& repaired, double tol) {
  // (product, period, subject) -> (before, after)
  std::map<std::tuple<std::string, int, std::string>, std::pair<double, double>> rows;
  auto collect = [&](const production::ProductionPlan& p, bool after) {
    auto put = [&](const std::string& product, int t, const std::string& subject, double q) {
      auto& row = rows[{product, t, subject}];
      (after ? row.second : row.first) = q;
    };
    for (const auto& [k, q] : p.production) {
      const auto& [plant, product, t] = k;
      put(product, t, "prod:" + plant, q);
    }
    for (const auto& [k, q] : p.shipments) {
      const auto& [from, to, product, t] = k;
      put(product, t, "ship:" + from + ">" + to, q);
    }
    for (const auto& [k, q] : p.inventory) {
      const auto& [loc, product, t] = k;
      put(product, t, "inv:" + loc, q);
    }
    for (const auto& [o, q] : p.deliveries) put("", 0, "deliver:" + o, q);
    for (const auto& [o, q] : p.shortfall) put("", 0, "short:" + o, q);
  };
  collect(incumbent, false);
  collect(repaired, true);
  std::vector<ChangeRecord> out;
  for (const auto& [k, v] : rows) {
    const auto& [product, t, subject] = k;
    const double delta = v.second - v.first;
    if (std::abs(delta) <= tol) continue;
    const std::string where = product.empty() ? subject : subject + ":" + product + ":" + std::to_string(t);
    out.push_back({"QuantityDelta", where, fmt(v.first) + " -> " + fmt(v.second) + " (" + (delta > 0 ? "+" : "") +
                                               fmt(delta) + ")"});
  }
  return out;
}

}  // namespace recover
