#include "recover/cli.hpp"

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "recover/error.hpp"
#include "recover/service.hpp"
#include "recover/workbench.hpp"

namespace recover {

using nlohmann::json;

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path + ": malformed JSON: " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw InputError("cannot write " + path);
  f << text;
}

struct Common {
  std::string instance, domain, out;
  std::optional<double> time_limit;
  std::optional<std::size_t> node_limit, max_variables, max_constraints;

  void attach(CLI::App* cmd, bool domain_required = false) {
    cmd->add_option("--instance", instance, "instance JSON file")->required();
    auto* d = cmd->add_option("--domain", domain, "tail or production (detected when omitted)")
                  ->check(CLI::IsMember({"tail", "production"}));
    if (domain_required) d->required();
    cmd->add_option("--out", out, "output file (stdout when omitted)");
    cmd->add_option("--time-limit", time_limit, "seconds per solve");
    cmd->add_option("--node-limit", node_limit, "branch-and-bound nodes per solve");
    cmd->add_option("--max-variables", max_variables, "kernel variable cap");
    cmd->add_option("--max-constraints", max_constraints, "kernel constraint cap");
  }

  SolveParams solve() const {
    SolveParams p;
    p.time_limit = time_limit;
    if (node_limit) p.node_limit = *node_limit;
    if (max_variables) p.max_variables = *max_variables;
    if (max_constraints) p.max_constraints = *max_constraints;
    p.validate();
    return p;
  }

  std::unique_ptr<Domain> load() const {
    return load_domain(read_json(instance), domain.empty() ? std::nullopt : std::optional<std::string>(domain));
  }
};

struct RepairOpts {
  std::string spec, method = "exact";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k_max, budget, sub_node_limit;

  void attach(CLI::App* cmd) {
    cmd->add_option("--spec", spec, "repair spec JSON file (defaults when omitted)");
    cmd->add_option("--method", method, "exact or vns")->check(CLI::IsMember({"exact", "vns"}));
    cmd->add_option("--seed", seed, "VNS seed");
    cmd->add_option("--k-max", k_max, "VNS neighbourhood cap (0 = all blocks)");
    cmd->add_option("--budget", budget, "VNS subproblem budget");
    cmd->add_option("--sub-node-limit", sub_node_limit, "node limit per VNS subproblem");
  }

  RepairSpec load_spec() const { return spec.empty() ? RepairSpec{} : repair_spec_from_json(read_json(spec)); }

  EvalOptions options(const SolveParams& solve) const {
    EvalOptions opt;
    opt.solve = solve;
    opt.method = parse_method(method);
    if (seed) opt.vns.seed = *seed;
    if (k_max) opt.vns.k_max = *k_max;
    if (budget) opt.vns.iter_budget = *budget;
    if (sub_node_limit) opt.vns.sub_node_limit = *sub_node_limit;
    opt.vns.validate();
    return opt;
  }
};

int emit(const workbench::Output& o, const std::string& path, std::ostream& out) {
  write_text(path, o.doc.dump(2) + "\n", out);
  return workbench::exit_code(o.outcome);
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Plan, repair and stress-test tail assignment and production plans", "recover"};
  app.require_subcommand(1);

  Common common;
  RepairOpts ropt;

  auto* plan = app.add_subcommand("plan", "solve the nominal model");
  common.attach(plan, true);

  std::string incumbent, scenario;
  auto* repair = app.add_subcommand("repair", "repair an incumbent plan after a scenario");
  common.attach(repair);
  ropt.attach(repair);
  repair->add_option("--incumbent", incumbent, "incumbent plan JSON")->required();
  repair->add_option("--scenario", scenario, "scenario JSON")->required();

  std::string plan_file, scenarios, csv;
  auto* evaluate = app.add_subcommand("evaluate", "recovery price of a plan over a scenario set");
  common.attach(evaluate);
  ropt.attach(evaluate);
  evaluate->add_option("--plan", plan_file, "plan JSON")->required();
  evaluate->add_option("--scenarios", scenarios, "scenario set JSON")->required();
  evaluate->add_option("--csv", csv, "also write the per-scenario rows as CSV");

  double alpha = 1.0;
  std::string mode = "simultaneous";
  std::size_t pool_size = 10;
  auto* robust = app.add_subcommand("robust", "two-stage planning over a scenario set");
  common.attach(robust);
  ropt.attach(robust);
  robust->add_option("--scenarios", scenarios, "scenario set JSON")->required();
  robust->add_option("--alpha", alpha, "weight of the recovery term")->check(CLI::NonNegativeNumber);
  robust->add_option("--mode", mode, "simultaneous or separate")->check(CLI::IsMember({"simultaneous", "separate"}));
  robust->add_option("--pool-size", pool_size, "separate mode candidate plans")->check(CLI::PositiveNumber);

  std::string validate_plan;
  auto* validate = app.add_subcommand("validate", "check an instance and optionally a plan");
  common.attach(validate);
  validate->add_option("--plan", validate_plan, "plan JSON");

  ServiceConfig svc;
  std::string listen = "127.0.0.1:8080", store_dir;
  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  serve->add_option("--listen", listen, "host:port")->envname("RECOVER_LISTEN");
  serve->add_option("--store", store_dir, "snapshot directory (in memory when omitted)")->envname("RECOVER_STORE");
  serve->add_option("--workers", svc.workers, "job worker threads (0 = hardware)")->envname("RECOVER_WORKERS");
  serve->add_option("--timeout", svc.request_timeout, "request timeout in seconds");
  serve->add_option("--max-variables", svc.solve.max_variables, "kernel variable cap");
  serve->add_option("--max-constraints", svc.solve.max_constraints, "kernel constraint cap");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 3;
  }

  try {
    if (plan->parsed()) return emit(workbench::plan(*common.load(), common.solve()), common.out, out);
    if (repair->parsed()) {
      const auto domain = common.load();
      const auto o = workbench::repair(*domain, read_json(incumbent), scenario_from_json(read_json(scenario)),
                                       ropt.load_spec(), ropt.options(common.solve()));
      return emit(o, common.out, out);
    }
    if (evaluate->parsed()) {
      const auto domain = common.load();
      const auto o = workbench::evaluate(*domain, read_json(plan_file), scenario_set_from_json(read_json(scenarios)),
                                         ropt.load_spec(), ropt.options(common.solve()));
      if (!csv.empty()) write_text(csv, o.csv, out);
      return emit(o, common.out, out);
    }
    if (robust->parsed()) {
      const auto domain = common.load();
      const auto o = workbench::robust(*domain, scenario_set_from_json(read_json(scenarios)), ropt.load_spec(), alpha,
                                       parse_mode(mode), ropt.options(common.solve()), pool_size);
      return emit(o, common.out, out);
    }
    if (validate->parsed()) {
      const auto domain = common.load();
      std::optional<json> p;
      if (!validate_plan.empty()) p = read_json(validate_plan);
      const auto o = workbench::validate(*domain, p);
      if (o.outcome != workbench::Outcome::Ok) err << "plan is not valid\n";
      return emit(o, common.out, out);
    }
    if (serve->parsed()) {
      const auto colon = listen.rfind(':');
      if (colon == std::string::npos) throw InputError("--listen expects host:port");
      svc.host = listen.substr(0, colon);
      svc.port = std::stoi(listen.substr(colon + 1));
      if (!store_dir.empty()) svc.store_dir = store_dir;
      Service service(svc);
      err << "listening on " << listen << "\n";
      return service.run() ? 0 : 3;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const json::exception& e) {
    err << "error: malformed input: " << e.what() << "\n";
    return 3;
  } catch (const SizeLimitError& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace recover
