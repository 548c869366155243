#include "recover/model_json.hpp"

#include <cmath>

#include "recover/error.hpp"

namespace recover {

using nlohmann::json;

json number_to_json(double value) {
  if (value == kInf) return "inf";
  if (value == -kInf) return "-inf";
  return value;
}

double number_from_json(const json& value) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const auto& s = value.get_ref<const std::string&>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw InputError("expected a number, got " + value.dump());
}

json expr_to_json(const LinExpr& expr) {
  json terms = json::array();
  for (const auto& t : expr.terms()) terms.push_back({{"coefficient", t.coefficient}, {"var", t.var.index}});
  return {{"terms", std::move(terms)}, {"constant", expr.constant()}};
}

LinExpr expr_from_json(const json& doc) {
  LinExpr expr(doc.value("constant", 0.0));
  for (const auto& t : doc.at("terms")) {
    expr.add(t.at("coefficient").get<double>(), VarId{t.at("var").get<std::size_t>()});
  }
  return expr;
}

json model_to_json(const Model& model) {
  json vars = json::array();
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    const auto& v = model.variables()[j];
    json entry = {{"id", j},
                  {"name", v.name},
                  {"kind", to_string(v.kind)},
                  {"lower", number_to_json(v.lower)},
                  {"upper", number_to_json(v.upper)}};
    if (v.start_time) entry["start_time"] = *v.start_time;
    vars.push_back(std::move(entry));
  }
  json cons = json::array();
  for (std::size_t i = 0; i < model.num_constraints(); ++i) {
    const auto& c = model.constraints()[i];
    cons.push_back({{"id", i},
                    {"name", c.name},
                    {"expr", expr_to_json(c.expr)},
                    {"sense", to_string(c.sense)},
                    {"rhs", c.rhs},
                    {"relax", c.relax_penalty ? json{{"penalty_per_unit", *c.relax_penalty}} : json(nullptr)}});
  }
  json kpis = json::array();
  for (const auto& k : model.kpis()) kpis.push_back({{"name", k.name}, {"expr", expr_to_json(k.expr)}});
  return {{"variables", std::move(vars)},
          {"constraints", std::move(cons)},
          {"objective", {{"sense", "minimize"}, {"expr", expr_to_json(model.objective())}}},
          {"kpis", std::move(kpis)}};
}

Model model_from_json(const json& doc) {
  try {
    Model model;
    for (const auto& v : doc.at("variables")) {
      VarSpec spec{v.at("name").get<std::string>(), parse_var_kind(v.at("kind").get<std::string>()),
                   number_from_json(v.at("lower")), number_from_json(v.at("upper")), std::nullopt};
      if (v.contains("start_time") && !v["start_time"].is_null()) spec.start_time = v["start_time"].get<double>();
      model.add_variable(std::move(spec));
    }
    for (const auto& c : doc.at("constraints")) {
      ConstraintSpec spec{c.at("name").get<std::string>(), expr_from_json(c.at("expr")),
                          parse_sense(c.at("sense").get<std::string>()), c.at("rhs").get<double>(),
                          std::nullopt};
      if (c.contains("relax") && !c["relax"].is_null()) {
        spec.relax_penalty = c["relax"].at("penalty_per_unit").get<double>();
      }
      model.add_constraint(std::move(spec));
    }
    const auto& obj = doc.at("objective");
    if (obj.value("sense", "minimize") != "minimize") throw InputError("objective sense must be 'minimize'");
    model.set_objective(expr_from_json(obj.at("expr")));
    for (const auto& k : doc.at("kpis")) model.add_kpi(k.at("name").get<std::string>(), expr_from_json(k.at("expr")));
    return model;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model document: ") + e.what());
  }
}

}  // namespace recover
