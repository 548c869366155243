#include "recover/model.hpp"

#include <algorithm>
#include <cmath>

#include "recover/error.hpp"

namespace recover {

std::string_view to_string(VarKind kind) {
  switch (kind) {
    case VarKind::Continuous: return "continuous";
    case VarKind::Integer: return "integer";
    case VarKind::Binary: return "binary";
  }
  return "continuous";
}

std::string_view to_string(Sense sense) {
  switch (sense) {
    case Sense::LessEqual: return "<=";
    case Sense::Equal: return "=";
    case Sense::GreaterEqual: return ">=";
  }
  return "<=";
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::Optimal: return "Optimal";
    case Status::Feasible: return "Feasible";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
    case Status::LimitReached: return "LimitReached";
  }
  return "Infeasible";
}

std::string_view to_string(Breach::Kind kind) {
  switch (kind) {
    case Breach::Kind::Constraint: return "constraint";
    case Breach::Kind::Bound: return "bound";
    case Breach::Kind::Integrality: return "integrality";
  }
  return "constraint";
}

VarKind parse_var_kind(std::string_view text) {
  if (text == "continuous") return VarKind::Continuous;
  if (text == "integer") return VarKind::Integer;
  if (text == "binary") return VarKind::Binary;
  throw InputError("unknown variable kind '" + std::string(text) + "'");
}

Sense parse_sense(std::string_view text) {
  if (text == "<=") return Sense::LessEqual;
  if (text == "=") return Sense::Equal;
  if (text == ">=") return Sense::GreaterEqual;
  throw InputError("unknown constraint sense '" + std::string(text) + "'");
}

Status parse_status(std::string_view text) {
  for (auto s : {Status::Optimal, Status::Feasible, Status::Infeasible, Status::Unbounded,
                 Status::LimitReached}) {
    if (to_string(s) == text) return s;
  }
  throw InputError("unknown status '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// LinExpr

LinExpr& LinExpr::add(double coefficient, VarId var) {
  if (coefficient == 0.0) return *this;
  auto it = std::lower_bound(terms_.begin(), terms_.end(), var,
                             [](const Term& t, VarId v) { return t.var < v; });
  if (it != terms_.end() && it->var == var) {
    it->coefficient += coefficient;
    if (it->coefficient == 0.0) terms_.erase(it);
  } else {
    terms_.insert(it, Term{coefficient, var});
  }
  return *this;
}

LinExpr& LinExpr::operator+=(const LinExpr& other) {
  for (const auto& t : other.terms_) add(t.coefficient, t.var);
  constant_ += other.constant_;
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& other) {
  for (const auto& t : other.terms_) add(-t.coefficient, t.var);
  constant_ -= other.constant_;
  return *this;
}

LinExpr& LinExpr::operator*=(double scale) {
  if (scale == 0.0) {
    terms_.clear();
    constant_ = 0.0;
    return *this;
  }
  for (auto& t : terms_) t.coefficient *= scale;
  constant_ *= scale;
  return *this;
}

double LinExpr::coefficient(VarId var) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), var,
                             [](const Term& t, VarId v) { return t.var < v; });
  return (it != terms_.end() && it->var == var) ? it->coefficient : 0.0;
}

LinExpr operator+(LinExpr lhs, const LinExpr& rhs) { return lhs += rhs; }
LinExpr operator-(LinExpr lhs, const LinExpr& rhs) { return lhs -= rhs; }
LinExpr operator*(double scale, LinExpr expr) { return expr *= scale; }
LinExpr operator*(LinExpr expr, double scale) { return expr *= scale; }

// ---------------------------------------------------------------------------
// Model

VarId Model::add_variable(VarSpec spec) {
  if (spec.name.empty()) throw InputError("variable name must not be empty");
  if (var_index_.contains(spec.name)) throw InputError("duplicate variable name '" + spec.name + "'");
  if (std::isnan(spec.lower) || std::isnan(spec.upper) || spec.lower > spec.upper) {
    throw InputError("variable '" + spec.name + "': lower bound exceeds upper bound");
  }
  if (spec.kind == VarKind::Binary && (spec.lower < 0.0 || spec.upper > 1.0)) {
    throw InputError("binary variable '" + spec.name + "' must have bounds within [0, 1]");
  }
  VarId id{variables_.size()};
  var_index_.emplace(spec.name, id.index);
  variables_.push_back(std::move(spec));
  return id;
}

void Model::check_expr(const LinExpr& expr, std::string_view owner) const {
  for (const auto& t : expr.terms()) {
    if (t.var.index >= variables_.size()) {
      throw InputError(std::string(owner) + " references an unregistered variable");
    }
    if (!std::isfinite(t.coefficient)) {
      throw InputError(std::string(owner) + " has a non-finite coefficient");
    }
  }
}

ConstraintId Model::add_constraint(ConstraintSpec spec) {
  if (spec.name.empty()) throw InputError("constraint name must not be empty");
  if (constraint_index_.contains(spec.name)) {
    throw InputError("duplicate constraint name '" + spec.name + "'");
  }
  check_expr(spec.expr, "constraint '" + spec.name + "'");
  if (!std::isfinite(spec.rhs)) throw InputError("constraint '" + spec.name + "' has a non-finite rhs");
  if (spec.relax_penalty && !(std::isfinite(*spec.relax_penalty) && *spec.relax_penalty >= 0.0)) {
    throw InputError("constraint '" + spec.name + "': relax penalty must be finite and >= 0");
  }
  ConstraintId id{constraints_.size()};
  constraint_index_.emplace(spec.name, id.index);
  constraints_.push_back(std::move(spec));
  return id;
}

void Model::set_objective(LinExpr expr) {
  check_expr(expr, "objective");
  objective_ = std::move(expr);
}

void Model::add_kpi(std::string name, LinExpr expr) {
  for (const auto& k : kpis_) {
    if (k.name == name) throw InputError("duplicate KPI name '" + name + "'");
  }
  check_expr(expr, "kpi '" + name + "'");
  kpis_.push_back(Kpi{std::move(name), std::move(expr)});
}

void Model::set_bounds(VarId var, double lower, double upper) {
  auto& v = variables_.at(var.index);
  if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
    throw InputError("variable '" + v.name + "': lower bound exceeds upper bound");
  }
  v.lower = lower;
  v.upper = upper;
}

std::optional<VarId> Model::find_variable(std::string_view name) const {
  auto it = var_index_.find(std::string(name));
  if (it == var_index_.end()) return std::nullopt;
  return VarId{it->second};
}

std::optional<ConstraintId> Model::find_constraint(std::string_view name) const {
  auto it = constraint_index_.find(std::string(name));
  if (it == constraint_index_.end()) return std::nullopt;
  return ConstraintId{it->second};
}

bool Model::operator==(const Model& other) const {
  return variables_ == other.variables_ && constraints_ == other.constraints_ &&
         objective_ == other.objective_ && kpis_ == other.kpis_;
}

// ---------------------------------------------------------------------------
// Solutions

double Solution::value(VarId var) const {
  if (var.index >= values.size()) throw SolutionError("variable has no value in solution");
  return values[var.index];
}

Assignment to_assignment(const Model& model, const Solution& solution) {
  Assignment out;
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    out.emplace(model.variables()[j].name, solution.value(VarId{j}));
  }
  return out;
}

Solution from_assignment(const Model& model, const Assignment& values, double fallback) {
  Solution sol;
  sol.status = Status::Feasible;
  sol.values.resize(model.num_variables());
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    const auto& v = model.variables()[j];
    auto it = values.find(v.name);
    sol.values[j] = it != values.end() ? it->second : std::clamp(fallback, v.lower, v.upper);
  }
  sol.objective_value = evaluate_expr(model.objective(), sol);
  return sol;
}

double evaluate_expr(const LinExpr& expr, std::span<const double> values) {
  double sum = expr.constant();
  for (const auto& t : expr.terms()) {
    if (t.var.index >= values.size()) throw SolutionError("expression references an unvalued variable");
    sum += t.coefficient * values[t.var.index];
  }
  return sum;
}

double evaluate_expr(const LinExpr& expr, const Solution& solution) {
  return evaluate_expr(expr, std::span<const double>(solution.values));
}

double violation(const ConstraintSpec& constraint, std::span<const double> values) {
  const double lhs = evaluate_expr(constraint.expr, values);
  switch (constraint.sense) {
    case Sense::LessEqual: return std::max(0.0, lhs - constraint.rhs);
    case Sense::GreaterEqual: return std::max(0.0, constraint.rhs - lhs);
    case Sense::Equal: return std::abs(lhs - constraint.rhs);
  }
  return 0.0;
}

double violation(const ConstraintSpec& constraint, const Solution& solution) {
  return violation(constraint, std::span<const double>(solution.values));
}

std::vector<Breach> check_feasible(const Model& model, const Solution& solution, double tol,
                                   double int_tol) {
  if (!(tol > 0.0) || !(int_tol > 0.0)) throw InputError("feasibility tolerances must be positive");
  if (solution.values.size() != model.num_variables()) {
    throw SolutionError("solution does not value every model variable");
  }
  std::vector<Breach> out;
  for (std::size_t i = 0; i < model.num_constraints(); ++i) {
    const auto& c = model.constraints()[i];
    const double v = violation(c, solution);
    if (v > tol) out.push_back({Breach::Kind::Constraint, i, c.name, v});
  }
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    const auto& var = model.variables()[j];
    const double x = solution.values[j];
    const double below = var.lower - x;
    const double above = x - var.upper;
    if (below > tol) out.push_back({Breach::Kind::Bound, j, var.name, below});
    if (above > tol) out.push_back({Breach::Kind::Bound, j, var.name, above});
    if (var.kind != VarKind::Continuous) {
      const double frac = std::abs(x - std::round(x));
      if (frac > int_tol) out.push_back({Breach::Kind::Integrality, j, var.name, frac});
    }
  }
  return out;
}

std::map<std::string, double> kpi_report(const Model& model, const Solution& solution) {
  if (!solution.has_values()) throw SolutionError("KPI report needs an Optimal or Feasible solution");
  std::map<std::string, double> out;
  for (const auto& k : model.kpis()) out.emplace(k.name, evaluate_expr(k.expr, solution));
  return out;
}

}  // namespace recover
