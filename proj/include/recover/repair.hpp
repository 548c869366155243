#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "recover/model.hpp"
#include "recover/scenario.hpp"
#include "recover/solver.hpp"

namespace recover {

struct RelaxRule {
  std::string pattern;             // full-match regex on constraint names
  std::optional<double> penalty;   // defaults to the constraint's annotation
  bool operator==(const RelaxRule&) const = default;
};

struct RepairSpec {
  std::vector<std::string> freeze_patterns;  // full-match regex on variable names
  std::optional<double> freeze_horizon;      // freeze decisions with start_time < horizon
  std::vector<RelaxRule> relax;
  double w_cost = 1.0;
  double w_dev = 1.0;
  double w_dev_cont = 0.0;
  bool auto_relax = true;  // elasticize every annotated constraint

  // Throws InputError on negative or non-finite weights, all-zero w_cost/w_dev, bad regex.
  void validate() const;
  bool operator==(const RepairSpec&) const = default;
};

RepairSpec repair_spec_from_json(const nlohmann::json& doc);
nlohmann::json repair_spec_to_json(const RepairSpec& spec);

// Per-variable freeze flags from patterns and horizon alone, plus notes for unused patterns.
std::vector<bool> freeze_candidates(const Model& model, const RepairSpec& spec, std::vector<ChangeRecord>* notes = nullptr);

// Penalty per constraint for those the spec elasticizes; nullopt keeps it hard.
std::vector<std::optional<double>> elastic_penalties(const Model& model, const RepairSpec& spec,
                                                     std::vector<ChangeRecord>* notes = nullptr);

struct ElasticRow {
  std::size_t constraint = 0;
  double penalty = 0.0;
  std::optional<VarId> plus;   // raises the lhs
  std::optional<VarId> minus;  // lowers the lhs
};

struct RepairModel {
  Model model;                // first base_count variables mirror the perturbed model
  std::size_t base_count = 0;
  LinExpr original_objective;
  std::vector<bool> frozen;                      // per base variable
  std::vector<std::optional<double>> reference;  // incumbent value per base variable
  std::vector<ElasticRow> elastic;
  std::vector<std::pair<VarId, VarId>> cont_dev;  // (d+, d-) per tracked continuous variable
  std::vector<std::size_t> cont_dev_var;          // base index for each cont_dev entry
  std::vector<ChangeRecord> notes;
  RepairSpec spec;
};

// Incumbent values are looked up by variable name. Frozen variables are pinned
// by bounds; variables the incumbent does not value get no freeze and no
// deviation term.
RepairModel build_repair_model(const Model& perturbed, const Assignment& incumbent, const RepairSpec& spec);

// Full repair-model point for the given base values: slacks and deviation
// columns take their least-cost values.
Solution complete_point(const RepairModel& rm, std::span<const double> base);
Solution base_solution(const RepairModel& rm, const Solution& full);

struct RepairMetrics {
  double original_objective = 0.0;
  double deviation_count = 0.0;
  double continuous_deviation = 0.0;
  double violation_penalty_total = 0.0;
  double repair_objective = 0.0;
};

RepairMetrics repair_metrics(const RepairModel& rm, const Solution& full);

struct Block {
  std::string id;
  std::vector<std::string> vars;
  bool operator==(const Block&) const = default;
};

struct TrajectoryEntry {
  std::size_t iteration = 0;
  std::size_t k = 0;
  bool accepted = false;
  double objective = 0.0;  // best repair objective after this step
};

// Domain-neutral description of one repair problem.
struct RepairCase {
  Model perturbed;
  Assignment incumbent;   // incumbent plan, by variable name
  Assignment start;       // incumbent projected onto the perturbed instance
  double nominal_objective = 0.0;
  std::vector<Block> blocks;
  std::vector<ChangeRecord> conflicts;
  std::function<nlohmann::json(const Solution&)> plan_json;             // perturbed-model solution -> plan
  std::function<std::vector<ChangeRecord>(const Solution&)> diff;       // vs incumbent
};

struct RepairResult {
  std::string method;
  Status status = Status::Infeasible;
  Solution solution;  // over the perturbed model
  std::map<std::string, double> kpis;
  std::vector<ChangeRecord> diff;
  std::vector<ChangeRecord> conflicts;
  std::vector<ChangeRecord> notes;
  SolveStats stats;
  nlohmann::json plan;  // null without values
  std::vector<TrajectoryEntry> trajectory;
  std::size_t improvements = 0;
};

nlohmann::json repair_result_to_json(const RepairResult& r);

struct VnsParams {
  std::size_t k_max = 0;  // 0: all blocks
  std::size_t iter_budget = 200;
  std::size_t sub_node_limit = 1000;
  std::uint64_t seed = 1;

  void validate() const;
};

VnsParams vns_params_from_json(const nlohmann::json& doc);
nlohmann::json vns_params_to_json(const VnsParams& p);

RepairResult repair_exact(const RepairCase& rc, const RepairSpec& spec, const SolveParams& params = {});
RepairResult repair_vns(const RepairCase& rc, const RepairSpec& spec, const VnsParams& vns,
                        const SolveParams& params = {});

// Repair objective of the projected incumbent with slacks absorbing violations;
// nullopt when the projection breaks a hard constraint.
std::optional<double> projection_objective(const RepairCase& rc, const RepairSpec& spec);

}  // namespace recover
