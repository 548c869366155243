#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "recover/domains.hpp"
#include "recover/robustness.hpp"

// JSON-in, JSON-out operations shared by the CLI and the HTTP service, so both
// produce the same documents for the same inputs.
namespace recover::workbench {

enum class Outcome { Ok, Infeasible, InputError, LimitReached };

Outcome outcome_of(Status s);
int exit_code(Outcome o);  // 0, 2, 3, 4

struct Output {
  nlohmann::json doc;
  Outcome outcome = Outcome::Ok;
  std::string csv;  // evaluate only
};

// Accepts a bare plan or a plan document carrying the plan under "plan".
nlohmann::json plan_body(const nlohmann::json& doc);

Output plan(const Domain& domain, const SolveParams& params = {});
Output repair(const Domain& domain, const nlohmann::json& incumbent, const Scenario& scenario, const RepairSpec& spec,
              const EvalOptions& opt);
Output evaluate(const Domain& domain, const nlohmann::json& plan, const std::vector<Scenario>& scenarios,
                const RepairSpec& spec, const EvalOptions& opt);
Output robust(const Domain& domain, const std::vector<Scenario>& scenarios, const RepairSpec& spec, double alpha,
              TwoStageMode mode, const EvalOptions& opt, std::size_t pool_size = 10);
Output validate(const Domain& domain, const std::optional<nlohmann::json>& plan);

// Options from a request body: method, seed, vns {k_max, iter_budget, sub_node_limit}.
EvalOptions eval_options_from_json(const nlohmann::json& body, const SolveParams& base);

}  // namespace recover::workbench
