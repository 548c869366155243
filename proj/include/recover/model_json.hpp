#pragma once

#include <json.hpp>

#include "recover/model.hpp"

namespace recover {

// Canonical model document: {variables, constraints, objective, kpis}.
// Infinite bounds are written as the strings "inf" / "-inf".
nlohmann::json model_to_json(const Model& model);
Model model_from_json(const nlohmann::json& doc);

nlohmann::json expr_to_json(const LinExpr& expr);
LinExpr expr_from_json(const nlohmann::json& doc);

double number_from_json(const nlohmann::json& value);
nlohmann::json number_to_json(double value);

}  // namespace recover
