#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "recover/domains.hpp"
#include "recover/repair.hpp"

namespace recover {

enum class RepairMethod { Exact, Vns };

RepairMethod parse_method(std::string_view text);
std::string_view to_string(RepairMethod m);

struct EvalOptions {
  RepairMethod method = RepairMethod::Exact;
  VnsParams vns;
  SolveParams solve;
};

RepairResult run_repair(const RepairCase& rc, const RepairSpec& spec, const EvalOptions& opt);

// repair objective - w_cost * nominal objective; +inf when the repair has no values.
double recovery_price(const RepairCase& rc, const RepairResult& r, const RepairSpec& spec);

struct ReportRow {
  std::string scenario;
  double weight = 1.0;
  Status status = Status::Infeasible;
  double recovery_price = 0.0;
  double repair_objective = 0.0;
};

struct RecoverabilityReport {
  double nominal_objective = 0.0;
  std::vector<ReportRow> rows;  // sorted by scenario id
  double max = 0.0;
  double mean = 0.0;
  double weighted_mean = 0.0;  // 0 when all weights are 0
};

void aggregate(RecoverabilityReport& report);

// Scenarios are repaired concurrently; the report does not depend on thread count.
RecoverabilityReport evaluate_recoverability(const Domain& domain, const nlohmann::json& plan,
                                             const std::vector<Scenario>& scenarios, const RepairSpec& spec,
                                             const EvalOptions& opt = {});

nlohmann::json report_to_json(const RecoverabilityReport& r);
std::string report_to_csv(const RecoverabilityReport& r);

enum class TwoStageMode { Simultaneous, Separate };

TwoStageMode parse_mode(std::string_view text);
std::string_view to_string(TwoStageMode m);

struct TwoStageResult {
  TwoStageMode mode = TwoStageMode::Simultaneous;
  double alpha = 0.0;
  Status status = Status::Infeasible;
  nlohmann::json plan;
  double nominal_objective = 0.0;
  double total = 0.0;  // nominal + alpha * weighted mean recovery price
  RecoverabilityReport report;
  std::vector<double> pool_totals;  // separate mode, in discovery order
  SolveStats stats;
};

// Extensive-form objective: (1 - alpha*w_cost) * nominal(x) + alpha * sum_s w_s/W * repair_s(y_s, x).
Model extensive_form(const Domain& domain, const std::vector<Scenario>& scenarios, const RepairSpec& spec, double alpha);

TwoStageResult two_stage_solve(const Domain& domain, const std::vector<Scenario>& scenarios, const RepairSpec& spec,
                               double alpha, TwoStageMode mode, const EvalOptions& opt = {},
                               std::size_t pool_size = 10);

nlohmann::json two_stage_to_json(const TwoStageResult& r);

}  // namespace recover
