#include "recover/domains.hpp"

#include <map>

#include "recover/error.hpp"

namespace recover {

using nlohmann::json;

std::vector<Block> enumerate_blocks(const tail::Formulation& f) {
  const auto& tt = f.timetable;
  std::vector<Block> out;
  for (std::size_t j = 0; j < tt.flights.size(); ++j) {
    Block b{"flight:" + tt.flights[j].id, {}};
    for (std::size_t k = 0; k < f.graph.arcs.size(); ++k) {
      if (f.graph.arcs[k].to == j) b.vars.push_back(f.model.variable(f.arc_var[k]).name);
    }
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<Block> enumerate_blocks(const production::Formulation& f) {
  const auto& in = f.instance;
  std::map<std::pair<std::string, int>, Block> blocks;
  for (const auto& p : in.products) {
    for (int t = 1; t <= in.periods; ++t) blocks[{p, t}] = Block{"product:" + p + ":" + std::to_string(t), {}};
  }
  auto put = [&](const std::string& p, int t, VarId v) { blocks.at({p, t}).vars.push_back(f.model.variable(v).name); };
  for (const auto& [k, v] : f.production) put(std::get<1>(k), std::get<2>(k), v);
  for (const auto& [k, v] : f.shipments) put(std::get<2>(k), std::get<3>(k), v);
  for (const auto& [k, v] : f.inventory) put(std::get<1>(k), std::get<2>(k), v);
  for (const auto& [k, v] : f.target_shortfall) put(std::get<1>(k), std::get<2>(k), v);
  for (const auto& o : in.orders) {
    put(o.product, o.due, f.deliveries.at(o.id));
    auto it = f.shortfall.find(o.id);
    if (it != f.shortfall.end()) put(o.product, o.due, it->second);
  }
  std::vector<Block> out;
  for (const auto& p : in.products) {
    for (int t = 1; t <= in.periods; ++t) out.push_back(std::move(blocks.at({p, t})));
  }
  return out;
}

RepairCase make_case(const tail::Timetable& tt, const tail::TailPlan& incumbent, const Scenario& s) {
  const auto nominal = tail::formulate_mip(tt);
  const auto inc = tail::encode_plan(nominal, incumbent);
  auto perturbed_tt = apply_scenario(tt, s);
  auto f = std::make_shared<tail::Formulation>(tail::formulate_mip(perturbed_tt));

  RepairCase rc;
  rc.perturbed = f->model;
  rc.incumbent = to_assignment(nominal.model, inc);
  rc.nominal_objective = evaluate_expr(nominal.model.objective(), inc);
  rc.start = to_assignment(f->model, tail::encode_plan(*f, tail::project_plan(perturbed_tt, incumbent)));
  rc.blocks = enumerate_blocks(*f);
  rc.conflicts = detect_conflicts(perturbed_tt, incumbent);
  rc.plan_json = [f](const Solution& s) { return tail::plan_to_json(tail::decode_plan(*f, s)); };
  rc.diff = [f, incumbent](const Solution& s) { return render_diff(incumbent, tail::decode_plan(*f, s)); };
  return rc;
}

RepairCase make_case(const production::Instance& in, const production::ProductionPlan& incumbent, const Scenario& s) {
  const auto nominal = production::formulate_model(in);
  const auto inc = production::encode_plan(nominal, incumbent);
  auto perturbed_in = apply_scenario(in, s);
  auto f = std::make_shared<production::Formulation>(production::formulate_model(perturbed_in));

  RepairCase rc;
  rc.perturbed = f->model;
  rc.incumbent = to_assignment(nominal.model, inc);
  rc.nominal_objective = evaluate_expr(nominal.model.objective(), inc);
  rc.start = to_assignment(f->model, production::encode_plan(*f, incumbent));
  rc.blocks = enumerate_blocks(*f);
  rc.conflicts = detect_conflicts(perturbed_in, incumbent);
  rc.plan_json = [f](const Solution& s) { return production::plan_to_json(production::decode_plan(*f, s)); };
  rc.diff = [f, incumbent](const Solution& s) { return render_diff(incumbent, production::decode_plan(*f, s)); };
  return rc;
}

namespace {

class TailDomain final : public Domain {
 public:
  explicit TailDomain(tail::Timetable tt) : tt_(std::move(tt)), f_(tail::formulate_mip(tt_)) {}
  std::string kind() const override { return "tail"; }
  json instance_json() const override { return tail::timetable_to_json(tt_); }
  Model nominal_model() const override { return f_.model; }
  Model perturbed_model(const Scenario& s) const override { return tail::formulate_mip(apply_scenario(tt_, s)).model; }
  json decode(const Solution& s) const override { return tail::plan_to_json(tail::decode_plan(f_, s)); }
  Solution encode(const json& plan) const override { return tail::encode_plan(f_, tail::plan_from_json(plan)); }
  std::vector<ChangeRecord> validate(const json& plan) const override {
    std::vector<ChangeRecord> out;
    for (const auto& v : tail::validate_plan(tt_, tail::plan_from_json(plan))) {
      std::string flights;
      for (const auto& f : v.flights) flights += (flights.empty() ? "" : ",") + f;
      out.push_back({std::string(to_string(v.code)), v.aircraft, flights});
    }
    return out;
  }
  std::vector<ChangeRecord> conflicts(const json& plan, const Scenario& s) const override {
    return detect_conflicts(apply_scenario(tt_, s), tail::plan_from_json(plan));
  }
  RepairCase repair_case(const json& plan, const Scenario& s) const override {
    return make_case(tt_, tail::plan_from_json(plan), s);
  }

 private:
  tail::Timetable tt_;
  tail::Formulation f_;
};

class ProductionDomain final : public Domain {
 public:
  explicit ProductionDomain(production::Instance in) : in_(std::move(in)), f_(production::formulate_model(in_)) {}
  std::string kind() const override { return "production"; }
  json instance_json() const override { return production::instance_to_json(in_); }
  Model nominal_model() const override { return f_.model; }
  Model perturbed_model(const Scenario& s) const override {
    return production::formulate_model(apply_scenario(in_, s)).model;
  }
  json decode(const Solution& s) const override { return production::plan_to_json(production::decode_plan(f_, s)); }
  Solution encode(const json& plan) const override {
    return production::encode_plan(f_, production::plan_from_json(plan));
  }
  std::vector<ChangeRecord> validate(const json& plan) const override {
    std::vector<ChangeRecord> out;
    for (const auto& v : production::validate_plan(in_, production::plan_from_json(plan))) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6g", v.amount);
      out.push_back({std::string(to_string(v.code)), v.subject, buf});
    }
    return out;
  }
  std::vector<ChangeRecord> conflicts(const json& plan, const Scenario& s) const override {
    return detect_conflicts(apply_scenario(in_, s), production::plan_from_json(plan));
  }
  RepairCase repair_case(const json& plan, const Scenario& s) const override {
    return make_case(in_, production::plan_from_json(plan), s);
  }

 private:
  production::Instance in_;
  production::Formulation f_;
};

}  // namespace

std::string detect_domain(const json& instance) {
  if (!instance.is_object()) throw InputError("instance must be a JSON object");
  if (instance.contains("flights")) return "tail";
  if (instance.contains("orders") || instance.contains("locations")) return "production";
  throw InputError("cannot tell the instance domain (expected flights or locations)");
}

std::unique_ptr<Domain> load_domain(const json& instance, std::optional<std::string> kind) {
  const auto detected = detect_domain(instance);
  if (kind && *kind != detected) throw InputError("instance looks like " + detected + ", not " + *kind);
  if (detected == "tail") return std::make_unique<TailDomain>(tail::timetable_from_json(instance));
  return std::make_unique<ProductionDomain>(production::instance_from_json(instance));
}

}  // namespace recover
