#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "editfactory/error.hpp"
#include "editfactory/store.hpp"
#include "editfactory/tasks.hpp"

namespace editfactory::server {

using TimePoint = std::chrono::system_clock::time_point;
using NowFn = std::function<TimePoint()>;

inline constexpr std::chrono::seconds kDefaultLease{30 * 60};

struct Lease {
  std::string task_id;
  std::string annotator;
  TimePoint expires;
};

struct Claim {
  tasks::Task task;
  Lease lease;
};

std::string format_utc(TimePoint t);

/// Hands out open tasks under time-bounded leases. Task definitions and
/// completions are persisted in the store; leases live in memory, so a
/// restart simply makes every open task claimable again.
class TaskQueue {
 public:
  explicit TaskQueue(corpus::Store& store, std::chrono::seconds lease = kDefaultLease, NowFn now = nullptr);

  // The annotator's live claim of this kind if one exists, else the first
  // open task (by id) with no live lease. nullopt when nothing is available.
  std::optional<Claim> claim_next(tasks::TaskKind kind, const std::string& annotator);

  // Validates the lease, then applies the kind-specific submission:
  //   refine:     {"text", "objectives": {"semantic_accuracy","spatial_clarity","fine_grained_detail"}}
  //   preference: {"failure_modes": [...], "chosen"?: text, "note"?: text}
  //   human_eval: {"outcome": "correct"|"defect", "defects": [...], "attest_no_p0"}
  // Throws kNotFound, kNotClaimant, kLeaseExpired, kTaskClosed plus the
  // module validation errors; a rejected submission keeps the lease.
  nlohmann::json submit(const std::string& task_id, const std::string& annotator, const nlohmann::json& body);

  void release(const std::string& task_id, const std::string& annotator);
  std::optional<Lease> lease(const std::string& task_id) const;

 private:
  corpus::Store& store_;
  std::chrono::seconds lease_;
  NowFn now_;
  mutable std::mutex mu_;
  std::map<std::string, Lease> leases_;
};

struct ServerConfig {
  std::string bind = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::map<std::string, std::string> tokens;  // bearer token -> annotator id
  std::string cors_origin;                    // empty: no CORS headers
  std::chrono::seconds lease = kDefaultLease;
  // Objective reports read <verdicts_dir>/<dataset>; default <data_dir>/verdicts.
  std::filesystem::path verdicts_dir;
};

// {"tokens": {"<token>": "<annotator>"}, "cors_origin": ..., "lease_seconds": ...}
ServerConfig server_config_from_json(const nlohmann::json& j);

// HTTP status for an error code as served by the REST API.
int http_status_for(editfactory::ErrorCode code);

// OpenAPI 3 document describing the REST API.
const nlohmann::json& openapi_document();

class Server {
 public:
  Server(corpus::Store& store, ServerConfig config, NowFn now = nullptr);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int start();
  // Binds and serves on the calling thread until stop().
  void run();
  void stop();

  TaskQueue& queue();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace editfactory::server
