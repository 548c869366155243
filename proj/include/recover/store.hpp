#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

namespace recover {

enum class Collection { Instances, Plans, Scenarios, Repairs, Reports, Jobs };

inline constexpr std::array<Collection, 6> kCollections{Collection::Instances, Collection::Plans,
                                                        Collection::Scenarios, Collection::Repairs,
                                                        Collection::Reports,   Collection::Jobs};

std::string_view collection_name(Collection c);  // directory name: "instances", ...
std::string_view id_prefix(Collection c);        // "inst", "plan", "scen", "rep", "report", "job"

enum class JobState { Queued, Running, Done, Failed };

std::string_view to_string(JobState s);
JobState parse_job_state(std::string_view text);

// Documents keyed by generated ids ("inst-1", "plan-3", ...). With a directory,
// every write is mirrored to <dir>/<collection>/<id>.json and the constructor
// reloads whatever is there.
class SessionStore {
 public:
  SessionStore() = default;
  explicit SessionStore(std::filesystem::path dir);

  std::string put(Collection c, nlohmann::json doc);
  std::optional<nlohmann::json> get(Collection c, const std::string& id) const;
  std::vector<std::string> ids(Collection c) const;

  // Jobs: {id, kind, subject, state, result, error, http_status}. Terminal
  // states never change again; set_job_state returns false if the job is gone
  // or already terminal.
  std::string create_job(const std::string& kind, const std::string& subject);
  bool set_job_state(const std::string& id, JobState state, std::optional<std::string> result = std::nullopt,
                     std::optional<nlohmann::json> error = std::nullopt, int http_status = 200);

  // First queued or running job of a kind on a subject.
  std::optional<std::string> active_job(const std::string& kind, const std::string& subject) const;

  const std::optional<std::filesystem::path>& directory() const { return dir_; }

 private:
  void persist(Collection c, const std::string& id, const nlohmann::json& doc) const;
  std::string next_id(Collection c);

  // "job-2" before "job-10"
  struct IdLess {
    bool operator()(const std::string& a, const std::string& b) const {
      return a.size() != b.size() ? a.size() < b.size() : a < b;
    }
  };

  mutable std::shared_mutex mu_;
  std::optional<std::filesystem::path> dir_;
  std::map<Collection, std::map<std::string, nlohmann::json, IdLess>> docs_;
  std::map<Collection, std::size_t> counters_;
};

}  // namespace recover
