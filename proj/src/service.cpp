#include "recover/service.hpp"

#include <condition_variable>
#include <deque>
#include <functional>
#include <thread>

#include <httplib.h>

#include "recover/error.hpp"
#include "recover/workbench.hpp"

namespace recover {

using nlohmann::json;

namespace {

class WorkerPool {
 public:
  explicit WorkerPool(std::size_t n) {
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t i = 0; i < n; ++i) threads_.emplace_back([this] { loop(); });
  }

  ~WorkerPool() { shutdown(); }

  void submit(std::function<void()> task) {
    {
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(task));
    }
    cv_.notify_one();
  }

  bool wait_idle(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    return idle_.wait_for(lock, timeout, [this] { return queue_.empty() && busy_ == 0; });
  }

  // Drains what is queued, then joins.
  void shutdown() {
    {
      std::lock_guard lock(mu_);
      if (stopping_) return;
      stopping_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

 private:
  void loop() {
    while (true) {
      std::function<void()> task;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
        if (queue_.empty()) return;
        task = std::move(queue_.front());
        queue_.pop_front();
        ++busy_;
      }
      task();
      {
        std::lock_guard lock(mu_);
        --busy_;
      }
      idle_.notify_all();
    }
  }

  std::mutex mu_;
  std::condition_variable cv_, idle_;
  std::deque<std::function<void()>> queue_;
  std::vector<std::thread> threads_;
  std::size_t busy_ = 0;
  bool stopping_ = false;
};

struct HttpError : std::runtime_error {
  HttpError(int status, const std::string& msg, json extra = json::object())
      : std::runtime_error(msg), status(status), extra(std::move(extra)) {}
  int status;
  json extra;
};

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw HttpError(400, std::string("malformed JSON body: ") + e.what());
  }
}

}  // namespace

struct Service::Impl {
  explicit Impl(ServiceConfig c)
      : config(std::move(c)), store(config.store_dir ? SessionStore(*config.store_dir) : SessionStore()),
        pool(config.workers) {
    server.set_read_timeout(config.request_timeout, 0);
    server.set_write_timeout(config.request_timeout, 0);
    routes();
  }

  json fetch(Collection c, const std::string& id) const {
    auto doc = store.get(c, id);
    if (!doc) throw HttpError(404, std::string(collection_name(c)) + " has no '" + id + "'");
    return *doc;
  }

  std::unique_ptr<Domain> domain_of(const std::string& instance_id) const {
    const auto inst = fetch(Collection::Instances, instance_id);
    return load_domain(inst.at("instance"), inst.at("domain").get<std::string>());
  }

  // Runs body(job id) on the pool; exceptions become failed jobs.
  std::string submit(const std::string& kind, const std::string& subject, std::function<void(const std::string&)> body) {
    const auto job = store.create_job(kind, subject);
    pool.submit([this, job, body = std::move(body)] {
      store.set_job_state(job, JobState::Running, std::nullopt, std::nullopt, 202);
      try {
        body(job);
      } catch (const HttpError& e) {
        json err = e.extra;
        err["message"] = e.what();
        store.set_job_state(job, JobState::Failed, std::nullopt, err, e.status);
      } catch (const InputError& e) {
        store.set_job_state(job, JobState::Failed, std::nullopt, json{{"message", e.what()}}, 400);
      } catch (const SizeLimitError& e) {
        store.set_job_state(job, JobState::Failed, std::nullopt, json{{"message", e.what()}}, 422);
      } catch (const std::exception& e) {
        store.set_job_state(job, JobState::Failed, std::nullopt, json{{"message", e.what()}}, 500);
      }
    });
    return job;
  }

  void finish(const std::string& job, Collection c, json record, const workbench::Output& out,
              const std::string& what) {
    const auto id = store.put(c, std::move(record));
    if (out.outcome == workbench::Outcome::Infeasible) {
      json err = {{"message", what + " is infeasible"}, {"status", out.doc.value("status", "Infeasible")}};
      if (out.doc.contains("conflicts")) err["conflicts"] = out.doc["conflicts"];
      store.set_job_state(job, JobState::Failed, id, err, 422);
    } else {
      store.set_job_state(job, JobState::Done, id, std::nullopt, 200);
    }
  }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  Handler wrap(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const HttpError& e) {
        json body = e.extra;
        body["error"] = e.what();
        reply(res, e.status, body);
      } catch (const InputError& e) {
        reply(res, 400, {{"error", e.what()}});
      } catch (const json::exception& e) {
        reply(res, 400, {{"error", std::string("malformed request: ") + e.what()}});
      } catch (const std::exception& e) {
        reply(res, 500, {{"error", e.what()}});
      }
    };
  }

  void get_doc(const std::string& pattern, Collection c) {
    server.Get(pattern, wrap([this, c](const httplib::Request& req, httplib::Response& res) {
      reply(res, 200, fetch(c, req.matches[1]));
    }));
  }

  void routes() {
    server.Post("/instances", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req);
      std::optional<std::string> kind;
      if (req.has_param("domain")) kind = req.get_param_value("domain");
      const auto domain = load_domain(body, kind);
      const auto id = store.put(Collection::Instances, {{"domain", domain->kind()}, {"instance", domain->instance_json()}});
      reply(res, 201, {{"id", id}, {"domain", domain->kind()}});
    }));
    get_doc(R"(/instances/([\w-]+))", Collection::Instances);

    server.Post(R"(/instances/([\w-]+)/plan)", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const std::string inst = req.matches[1];
      fetch(Collection::Instances, inst);
      if (const auto active = store.active_job("plan", inst)) {
        throw HttpError(409, "a plan job is already pending for " + inst, {{"job", *active}});
      }
      const auto job = submit("plan", inst, [this, inst](const std::string& job) {
        const auto out = workbench::plan(*domain_of(inst), config.solve);
        json record = out.doc;
        record["instance"] = inst;
        finish(job, Collection::Plans, std::move(record), out, "the nominal model");
      });
      reply(res, 202, {{"job", job}, {"state", "queued"}});
    }));

    get_doc(R"(/jobs/([\w-]+))", Collection::Jobs);
    get_doc(R"(/plans/([\w-]+))", Collection::Plans);
    get_doc(R"(/repairs/([\w-]+))", Collection::Repairs);
    get_doc(R"(/reports/([\w-]+))", Collection::Reports);
    get_doc(R"(/scenarios/([\w-]+))", Collection::Scenarios);

    server.Post(R"(/plans/([\w-]+)/repairs)", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const std::string plan_id = req.matches[1];
      const auto plan = fetch(Collection::Plans, plan_id);
      if (!plan.at("plan").is_object()) throw HttpError(409, plan_id + " holds no plan");
      const auto body = parse_body(req);
      if (!body.contains("scenario")) throw InputError("repair request needs a scenario");
      const auto scenario = scenario_from_json(body["scenario"]);
      const auto spec = body.contains("spec") ? repair_spec_from_json(body["spec"]) : RepairSpec{};
      spec.validate();
      const auto opt = workbench::eval_options_from_json(body, config.solve);
      const std::string inst = plan.at("instance");
      domain_of(inst)->perturbed_model(scenario);  // rejects events from the other domain
      const auto scen_id = store.put(Collection::Scenarios, {{"instance", inst}, {"scenario", scenario_to_json(scenario)}});
      const auto job = submit("repair", plan_id, [=, this](const std::string& job) {
        const auto out = workbench::repair(*domain_of(inst), plan.at("plan"), scenario, spec, opt);
        json record = {{"plan", plan_id},
                       {"instance", inst},
                       {"scenario", scen_id},
                       {"spec", repair_spec_to_json(spec)},
                       {"result", out.doc}};
        finish(job, Collection::Repairs, std::move(record), out, "the repair");
      });
      reply(res, 202, {{"job", job}, {"state", "queued"}, {"scenario", scen_id}});
    }));

    server.Post(R"(/instances/([\w-]+)/recoverability)", wrap([this](const httplib::Request& req,
                                                                     httplib::Response& res) {
      const std::string inst = req.matches[1];
      fetch(Collection::Instances, inst);
      const auto body = parse_body(req);
      if (!body.contains("scenarios")) throw InputError("recoverability request needs scenarios");
      const auto scenarios = scenario_set_from_json(body["scenarios"]);
      const auto spec = body.contains("spec") ? repair_spec_from_json(body["spec"]) : RepairSpec{};
      spec.validate();
      const auto opt = workbench::eval_options_from_json(body, config.solve);
      const bool two_stage = body.contains("alpha") || body.contains("mode");

      if (two_stage) {
        const double alpha = body.value("alpha", 1.0);
        const auto mode = parse_mode(body.value("mode", std::string("simultaneous")));
        const std::size_t pool = body.value("pool_size", std::size_t{10});
        const auto job = submit("recoverability", inst, [=, this](const std::string& job) {
          const auto out = workbench::robust(*domain_of(inst), scenarios, spec, alpha, mode, opt, pool);
          finish(job, Collection::Reports, {{"instance", inst}, {"kind", "robust"}, {"report", out.doc}}, out,
                 "the two-stage model");
        });
        reply(res, 202, {{"job", job}, {"state", "queued"}});
        return;
      }

      if (!body.contains("plan")) throw InputError("recoverability request needs a plan id or plan document");
      json plan;
      std::string plan_ref;
      if (body["plan"].is_string()) {
        plan_ref = body["plan"].get<std::string>();
        const auto rec = fetch(Collection::Plans, plan_ref);
        if (rec.at("instance") != inst) throw HttpError(409, plan_ref + " belongs to another instance");
        plan = rec.at("plan");
      } else {
        plan = workbench::plan_body(body["plan"]);
      }
      const auto job = submit("recoverability", inst, [=, this](const std::string& job) {
        const auto out = workbench::evaluate(*domain_of(inst), plan, scenarios, spec, opt);
        json record = {{"instance", inst}, {"kind", "evaluate"}, {"report", out.doc}};
        if (!plan_ref.empty()) record["plan"] = plan_ref;
        finish(job, Collection::Reports, std::move(record), out, "the evaluation");
      });
      reply(res, 202, {{"job", job}, {"state", "queued"}});
    }));

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) reply(res, res.status, {{"error", httplib::status_message(res.status)}});
    });
  }

  ServiceConfig config;
  SessionStore store;
  WorkerPool pool;
  httplib::Server server;
  std::thread listener;
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Service::~Service() { stop(); }

int Service::start() {
  auto& s = impl_->server;
  const int port = impl_->config.port == 0 ? s.bind_to_any_port(impl_->config.host)
                                           : (s.bind_to_port(impl_->config.host, impl_->config.port) ? impl_->config.port : -1);
  if (port < 0) throw std::runtime_error("cannot bind " + impl_->config.host + ":" + std::to_string(impl_->config.port));
  impl_->listener = std::thread([&s] { s.listen_after_bind(); });
  s.wait_until_ready();
  return port;
}

bool Service::run() { return impl_->server.listen(impl_->config.host, impl_->config.port); }

void Service::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
  impl_->pool.shutdown();
}

bool Service::wait_idle(std::chrono::milliseconds timeout) { return impl_->pool.wait_idle(timeout); }

SessionStore& Service::store() { return impl_->store; }

}  // namespace recover
