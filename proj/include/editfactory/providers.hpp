#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "editfactory/error.hpp"
#include "editfactory/util.hpp"

namespace editfactory::providers {

struct ProviderConfig {
  std::string name;
  std::string endpoint;      // http(s)://..., or mock://<fixture dir>
  std::string auth_env_var;  // empty: no auth
  std::string model_id;
  int max_parallel = 4;
  double timeout_s = 60;
  int max_retries = 3;
  int backoff_base_ms = 500;
  int backoff_cap_ms = 30'000;
  bool uri_passthrough = false;  // send http(s) image URIs instead of inline base64
  std::string audit_log;         // JSONL file; empty disables auditing
};

// Throws kInvalidArgument when an invariant does not hold.
void validate(const ProviderConfig& config);
ProviderConfig provider_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

// Default env var: EDITFACTORY_<NAME>_API_KEY with NAME upper-cased.
std::string default_auth_env_var(std::string_view provider_name);

struct ImageInput {
  std::string role;  // "source" or "target"
  Bytes bytes;
  std::string uri;
  std::string mime = "image/png";
};

struct ChatRequest {
  std::vector<ImageInput> images;  // exactly [source, target]
  std::string prompt;
  double temperature = 0.0;
  std::optional<std::int64_t> seed;
  // Local label for fixtures and audit logs; never sent on the wire.
  std::string tag;
};

void validate(const ChatRequest& req);

// Stable digest of everything that determines the provider's answer.
std::string request_hash(const ProviderConfig& config, const ChatRequest& req);

struct Completion {
  std::string text;
  std::chrono::milliseconds latency{0};
  int retry_count = 0;
};

struct BatchError {
  ErrorCode code;
  std::string message;
};

struct BatchItem {
  std::size_t index = 0;
  std::variant<Completion, BatchError> result;
  bool ok() const { return std::holds_alternative<Completion>(result); }
  const Completion& completion() const { return std::get<Completion>(result); }
  const BatchError& error() const { return std::get<BatchError>(result); }
};

/// One attempt's outcome at the wire level.
struct AttemptResult {
  enum class Kind { kOk, kHttpError, kTransportError, kTimeout };
  Kind kind = Kind::kOk;
  int status = 0;
  std::string text;  // extracted completion text when kOk
  std::string body;  // raw body for errors
};

/// A wire-format adapter. Implementations perform exactly one attempt.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual AttemptResult send(const ProviderConfig& config, const ChatRequest& req, const std::string& api_key) = 0;
};

// OpenAI-compatible /chat/completions with image_url parts.
std::shared_ptr<Transport> make_openai_transport();
// Replays fixtures from the directory named by a mock:// endpoint:
//   <dir>/<request_hash>.txt, then <dir>/tags/<sanitized tag>.txt, then <dir>/default.txt.
std::shared_ptr<Transport> make_mock_transport();
std::shared_ptr<Transport> transport_for(const ProviderConfig& config);

struct Telemetry {
  std::uint64_t requests = 0;
  std::uint64_t attempts = 0;
  std::uint64_t retries = 0;
  std::uint64_t failures = 0;
  int in_flight_peak = 0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Retrying client shared by the synthesis, filtering and judge stages.
///
/// Retries happen on transport failures, timeouts, 429 and 5xx; any other
/// status is surfaced immediately as kProviderError. Backoff before retry k
/// (1-based) is min(cap, base * 2^(k-1)) milliseconds.
class Client {
 public:
  explicit Client(ProviderConfig config, std::shared_ptr<Transport> transport = nullptr, Sleeper sleeper = nullptr);

  const ProviderConfig& config() const { return config_; }

  Completion complete(const ChatRequest& req) const;
  // Output order matches input; at most max_parallel requests are in flight.
  std::vector<BatchItem> batch_complete(std::span<const ChatRequest> reqs) const;

  Telemetry telemetry() const;

  static std::chrono::milliseconds backoff_delay(const ProviderConfig& config, int retry);

 private:
  void audit(const ChatRequest& req, const AttemptResult& res, int attempt) const;

  ProviderConfig config_;
  std::shared_ptr<Transport> transport_;
  Sleeper sleeper_;
  mutable std::atomic<std::uint64_t> requests_{0}, attempts_{0}, retries_{0}, failures_{0};
  mutable std::atomic<int> in_flight_{0}, in_flight_peak_{0};
  mutable std::mutex audit_mu_;
};

/// Named provider configurations loaded from a JSON file:
///   {"providers":[{"name":"judge","endpoint":"mock://fixtures/judge", ...}]}
class ProviderRegistry {
 public:
  static ProviderRegistry load(const std::filesystem::path& path);
  static ProviderRegistry from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

  const ProviderConfig& get(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, ProviderConfig> providers_;
};

}  // namespace editfactory::providers
