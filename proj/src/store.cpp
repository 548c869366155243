#include "recover/store.hpp"

#include <fstream>

#include "recover/error.hpp"

namespace recover {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view collection_name(Collection c) {
  switch (c) {
    case Collection::Instances: return "instances";
    case Collection::Plans: return "plans";
    case Collection::Scenarios: return "scenarios";
    case Collection::Repairs: return "repairs";
    case Collection::Reports: return "reports";
    case Collection::Jobs: return "jobs";
  }
  return "?";
}

std::string_view id_prefix(Collection c) {
  switch (c) {
    case Collection::Instances: return "inst";
    case Collection::Plans: return "plan";
    case Collection::Scenarios: return "scen";
    case Collection::Repairs: return "rep";
    case Collection::Reports: return "report";
    case Collection::Jobs: return "job";
  }
  return "?";
}

std::string_view to_string(JobState s) {
  switch (s) {
    case JobState::Queued: return "queued";
    case JobState::Running: return "running";
    case JobState::Done: return "done";
    case JobState::Failed: return "failed";
  }
  return "?";
}

JobState parse_job_state(std::string_view text) {
  for (auto s : {JobState::Queued, JobState::Running, JobState::Done, JobState::Failed}) {
    if (to_string(s) == text) return s;
  }
  throw InputError("unknown job state '" + std::string(text) + "'");
}

namespace {

bool terminal(const json& job) {
  const auto s = parse_job_state(job.at("state").get<std::string>());
  return s == JobState::Done || s == JobState::Failed;
}

}  // namespace

SessionStore::SessionStore(fs::path dir) : dir_(std::move(dir)) {
  for (auto c : kCollections) {
    const auto sub = *dir_ / collection_name(c);
    fs::create_directories(sub);
    const std::string prefix = std::string(id_prefix(c)) + "-";
    for (const auto& entry : fs::directory_iterator(sub)) {
      if (entry.path().extension() != ".json") continue;
      const auto id = entry.path().stem().string();
      if (id.rfind(prefix, 0) != 0) continue;
      std::ifstream in(entry.path());
      json doc;
      try {
        doc = json::parse(in);
      } catch (const json::exception& e) {
        throw InputError("corrupt store file " + entry.path().string() + ": " + e.what());
      }
      const auto n = std::stoull(id.substr(prefix.size()));
      counters_[c] = std::max<std::size_t>(counters_[c], n);
      docs_[c][id] = std::move(doc);
    }
  }
  // jobs interrupted by a restart cannot resume
  for (auto& [id, job] : docs_[Collection::Jobs]) {
    if (!terminal(job)) {
      job["state"] = to_string(JobState::Failed);
      job["error"] = {{"message", "interrupted by restart"}};
      job["http_status"] = 500;
      persist(Collection::Jobs, id, job);
    }
  }
}

std::string SessionStore::next_id(Collection c) {
  return std::string(id_prefix(c)) + "-" + std::to_string(++counters_[c]);
}

void SessionStore::persist(Collection c, const std::string& id, const json& doc) const {
  if (!dir_) return;
  const auto path = *dir_ / collection_name(c) / (id + ".json");
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + tmp);
  }
  fs::rename(tmp, path);
}

std::string SessionStore::put(Collection c, json doc) {
  if (!doc.is_object()) throw InputError("stored documents must be JSON objects");
  std::unique_lock lock(mu_);
  const auto id = next_id(c);
  doc["id"] = id;
  persist(c, id, doc);
  docs_[c][id] = std::move(doc);
  return id;
}

std::optional<json> SessionStore::get(Collection c, const std::string& id) const {
  std::shared_lock lock(mu_);
  const auto it = docs_.find(c);
  if (it == docs_.end()) return std::nullopt;
  const auto d = it->second.find(id);
  if (d == it->second.end()) return std::nullopt;
  return d->second;
}

std::vector<std::string> SessionStore::ids(Collection c) const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  const auto it = docs_.find(c);
  if (it == docs_.end()) return out;
  for (const auto& [id, doc] : it->second) out.push_back(id);
  return out;
}

std::string SessionStore::create_job(const std::string& kind, const std::string& subject) {
  return put(Collection::Jobs, {{"kind", kind},
                                {"subject", subject},
                                {"state", to_string(JobState::Queued)},
                                {"result", nullptr},
                                {"error", nullptr},
                                {"http_status", 202}});
}

bool SessionStore::set_job_state(const std::string& id, JobState state, std::optional<std::string> result,
                                 std::optional<json> error, int http_status) {
  std::unique_lock lock(mu_);
  auto& jobs = docs_[Collection::Jobs];
  const auto it = jobs.find(id);
  if (it == jobs.end() || terminal(it->second)) return false;
  auto& job = it->second;
  job["state"] = to_string(state);
  job["result"] = result ? json(*result) : json();
  job["error"] = error ? *error : json();
  job["http_status"] = http_status;
  persist(Collection::Jobs, id, job);
  return true;
}

std::optional<std::string> SessionStore::active_job(const std::string& kind, const std::string& subject) const {
  std::shared_lock lock(mu_);
  const auto it = docs_.find(Collection::Jobs);
  if (it == docs_.end()) return std::nullopt;
  for (const auto& [id, job] : it->second) {
    if (job.at("kind") == kind && job.at("subject") == subject && !terminal(job)) return id;
  }
  return std::nullopt;
}

}  // namespace recover
