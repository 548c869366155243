#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "recover/solver.hpp"
#include "recover/store.hpp"

namespace recover {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::optional<std::filesystem::path> store_dir;
  std::size_t workers = 0;  // 0 = hardware concurrency
  int request_timeout = 30;  // seconds
  SolveParams solve;
};

// HTTP front end over a SessionStore. Solves run as jobs on a FIFO worker pool,
// so jobs start in submission order.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int start();
  // Binds and serves on the calling thread until stop().
  bool run();
  void stop();

  // Blocks until no job is queued or running, or the timeout passes.
  bool wait_idle(std::chrono::milliseconds timeout);

  SessionStore& store();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace recover
