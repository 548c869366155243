#pragma once

#include <compare>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace recover {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kDefaultFeasibilityTol = 1e-6;
inline constexpr double kDefaultIntegralityTol = 1e-6;

enum class VarKind { Continuous, Integer, Binary };
enum class Sense { LessEqual, Equal, GreaterEqual };
enum class Status { Optimal, Feasible, Infeasible, Unbounded, LimitReached };

std::string_view to_string(VarKind kind);
std::string_view to_string(Sense sense);
std::string_view to_string(Status status);
VarKind parse_var_kind(std::string_view text);
Sense parse_sense(std::string_view text);
Status parse_status(std::string_view text);

struct VarId {
  std::size_t index = 0;
  auto operator<=>(const VarId&) const = default;
};

struct ConstraintId {
  std::size_t index = 0;
  auto operator<=>(const ConstraintId&) const = default;
};

struct Term {
  double coefficient = 0.0;
  VarId var;
  bool operator==(const Term&) const = default;
};

/// Linear expression in canonical form: terms sorted by variable index,
/// one term per variable, no zero coefficients.
class LinExpr {
 public:
  LinExpr() = default;
  explicit LinExpr(double constant) : constant_(constant) {}
  LinExpr(VarId var) { add(1.0, var); }  // NOLINT: implicit by design of the builder API

  LinExpr& add(double coefficient, VarId var);
  LinExpr& add_constant(double value) {
    constant_ += value;
    return *this;
  }

  LinExpr& operator+=(const LinExpr& other);
  LinExpr& operator-=(const LinExpr& other);
  LinExpr& operator*=(double scale);

  const std::vector<Term>& terms() const { return terms_; }
  double constant() const { return constant_; }
  double coefficient(VarId var) const;
  bool empty() const { return terms_.empty(); }

  bool operator==(const LinExpr&) const = default;

 private:
  std::vector<Term> terms_;
  double constant_ = 0.0;
};

LinExpr operator+(LinExpr lhs, const LinExpr& rhs);
LinExpr operator-(LinExpr lhs, const LinExpr& rhs);
LinExpr operator*(double scale, LinExpr expr);
LinExpr operator*(LinExpr expr, double scale);

struct VarSpec {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = kInf;
  // Domain time the decision refers to; drives horizon-based freezing.
  std::optional<double> start_time;

  bool operator==(const VarSpec&) const = default;
};

struct ConstraintSpec {
  std::string name;
  LinExpr expr;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
  // Per-unit penalty applied when a repair elasticizes this constraint.
  std::optional<double> relax_penalty;

  bool operator==(const ConstraintSpec&) const = default;
};

struct Kpi {
  std::string name;
  LinExpr expr;
  bool operator==(const Kpi&) const = default;
};

/// MILP model. The objective is always minimized; callers negate to maximize.
class Model {
 public:
  VarId add_variable(VarSpec spec);
  ConstraintId add_constraint(ConstraintSpec spec);
  void set_objective(LinExpr expr);
  void add_kpi(std::string name, LinExpr expr);

  // Narrows or widens the bounds of an existing variable.
  void set_bounds(VarId var, double lower, double upper);

  std::size_t num_variables() const { return variables_.size(); }
  std::size_t num_constraints() const { return constraints_.size(); }

  const VarSpec& variable(VarId var) const { return variables_.at(var.index); }
  const ConstraintSpec& constraint(ConstraintId id) const { return constraints_.at(id.index); }
  const std::vector<VarSpec>& variables() const { return variables_; }
  const std::vector<ConstraintSpec>& constraints() const { return constraints_; }
  const LinExpr& objective() const { return objective_; }
  const std::vector<Kpi>& kpis() const { return kpis_; }

  std::optional<VarId> find_variable(std::string_view name) const;
  std::optional<ConstraintId> find_constraint(std::string_view name) const;

  bool is_integral(VarId var) const { return variable(var).kind != VarKind::Continuous; }

  bool operator==(const Model& other) const;

 private:
  void check_expr(const LinExpr& expr, std::string_view owner) const;

  std::vector<VarSpec> variables_;
  std::vector<ConstraintSpec> constraints_;
  LinExpr objective_;
  std::vector<Kpi> kpis_;
  std::unordered_map<std::string, std::size_t> var_index_;
  std::unordered_map<std::string, std::size_t> constraint_index_;
};

struct Solution {
  Status status = Status::Infeasible;
  std::vector<double> values;
  double objective_value = std::numeric_limits<double>::quiet_NaN();

  // LimitReached solutions carry values when an incumbent was found.
  bool has_values() const {
    return status == Status::Optimal || status == Status::Feasible ||
           (status == Status::LimitReached && !values.empty());
  }
  double value(VarId var) const;
};

/// Variable values keyed by name; the model-independent view of a plan.
using Assignment = std::map<std::string, double>;

Assignment to_assignment(const Model& model, const Solution& solution);
// Variables missing from the assignment take `fallback` clamped to their bounds.
Solution from_assignment(const Model& model, const Assignment& values, double fallback = 0.0);

double evaluate_expr(const LinExpr& expr, std::span<const double> values);
double evaluate_expr(const LinExpr& expr, const Solution& solution);

double violation(const ConstraintSpec& constraint, std::span<const double> values);
double violation(const ConstraintSpec& constraint, const Solution& solution);

struct Breach {
  enum class Kind { Constraint, Bound, Integrality };
  Kind kind = Kind::Constraint;
  std::size_t index = 0;  // constraint index for Constraint, variable index otherwise
  std::string name;
  double amount = 0.0;
};

std::string_view to_string(Breach::Kind kind);

std::vector<Breach> check_feasible(const Model& model, const Solution& solution, double tol,
                                   double int_tol = kDefaultIntegralityTol);

std::map<std::string, double> kpi_report(const Model& model, const Solution& solution);

}  // namespace recover
