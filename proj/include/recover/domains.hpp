#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "recover/production.hpp"
#include "recover/repair.hpp"
#include "recover/scenario.hpp"
#include "recover/tail.hpp"

namespace recover {

// Tail: one block per flight (every arc variable entering it). Production: one
// block per (product, period).
std::vector<Block> enumerate_blocks(const tail::Formulation& f);
std::vector<Block> enumerate_blocks(const production::Formulation& f);

RepairCase make_case(const tail::Timetable& tt, const tail::TailPlan& incumbent, const Scenario& s);
RepairCase make_case(const production::Instance& in, const production::ProductionPlan& incumbent, const Scenario& s);

// JSON-facing view of one loaded instance.
class Domain {
 public:
  virtual ~Domain() = default;
  virtual std::string kind() const = 0;
  virtual nlohmann::json instance_json() const = 0;
  virtual Model nominal_model() const = 0;
  virtual Model perturbed_model(const Scenario& s) const = 0;
  // Nominal-model solution to plan JSON.
  virtual nlohmann::json decode(const Solution& nominal) const = 0;
  // Plan JSON to nominal-model values; InputError if the plan does not fit.
  virtual Solution encode(const nlohmann::json& plan) const = 0;
  virtual std::vector<ChangeRecord> validate(const nlohmann::json& plan) const = 0;
  virtual std::vector<ChangeRecord> conflicts(const nlohmann::json& plan, const Scenario& s) const = 0;
  virtual RepairCase repair_case(const nlohmann::json& plan, const Scenario& s) const = 0;
};

// "tail" when the document has flights, "production" when it has orders or
// locations; an explicit kind must agree with the document.
std::string detect_domain(const nlohmann::json& instance);
std::unique_ptr<Domain> load_domain(const nlohmann::json& instance, std::optional<std::string> kind = std::nullopt);

}  // namespace recover
