#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "editfactory/providers.hpp"

namespace editfactory::providers {

using nlohmann::json;

void validate(const ProviderConfig& config) {
  if (config.name.empty()) raise(ErrorCode::kInvalidArgument, "provider name is empty");
  if (config.endpoint.empty()) raise(ErrorCode::kInvalidArgument, "provider " + config.name + ": endpoint is empty");
  if (config.max_parallel < 1) raise(ErrorCode::kInvalidArgument, "provider " + config.name + ": max_parallel < 1");
  if (!(config.timeout_s > 0)) raise(ErrorCode::kInvalidArgument, "provider " + config.name + ": timeout_s <= 0");
  if (config.max_retries < 0) raise(ErrorCode::kInvalidArgument, "provider " + config.name + ": max_retries < 0");
  if (config.backoff_base_ms < 0 || config.backoff_cap_ms < 0) {
    raise(ErrorCode::kInvalidArgument, "provider " + config.name + ": negative backoff");
  }
}

std::string default_auth_env_var(std::string_view provider_name) {
  std::string up;
  for (char c : provider_name) {
    up.push_back(std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : '_');
  }
  return "EDITFACTORY_" + up + "_API_KEY";
}

ProviderConfig provider_from_json(const json& j, const std::filesystem::path& base_dir) {
  ProviderConfig c;
  j.at("name").get_to(c.name);
  j.at("endpoint").get_to(c.endpoint);
  c.model_id = j.value("model_id", c.name);
  const bool is_mock = c.endpoint.rfind("mock://", 0) == 0;
  c.auth_env_var = j.contains("auth_env_var") ? j["auth_env_var"].get<std::string>()
                                               : (is_mock ? "" : default_auth_env_var(c.name));
  c.max_parallel = j.value("max_parallel", c.max_parallel);
  c.timeout_s = j.value("timeout_s", c.timeout_s);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.backoff_base_ms = j.value("backoff_base_ms", c.backoff_base_ms);
  c.backoff_cap_ms = j.value("backoff_cap_ms", c.backoff_cap_ms);
  c.uri_passthrough = j.value("uri_passthrough", c.uri_passthrough);
  c.audit_log = j.value("audit_log", "");
  if (is_mock) {
    std::filesystem::path dir = c.endpoint.substr(7);
    if (dir != "echo" && dir.is_relative() && !base_dir.empty()) c.endpoint = "mock://" + (base_dir / dir).string();
  }
  if (!c.audit_log.empty() && std::filesystem::path(c.audit_log).is_relative() && !base_dir.empty()) {
    c.audit_log = (base_dir / c.audit_log).string();
  }
  validate(c);
  return c;
}

void validate(const ChatRequest& req) {
  if (req.images.size() != 2) raise(ErrorCode::kInvalidArgument, "chat request needs exactly two images");
  if (req.images[0].role != "source" || req.images[1].role != "target") {
    raise(ErrorCode::kInvalidArgument, "chat request images must be [source, target]");
  }
  for (const auto& img : req.images) {
    if (img.bytes.empty() && img.uri.empty()) raise(ErrorCode::kInvalidArgument, "image has neither bytes nor uri");
  }
  if (req.prompt.empty()) raise(ErrorCode::kInvalidArgument, "chat request prompt is empty");
}

std::string request_hash(const ProviderConfig& config, const ChatRequest& req) {
  json canon = {{"model_id", config.model_id}, {"prompt", req.prompt}, {"temperature", req.temperature}};
  canon["seed"] = req.seed ? json(*req.seed) : json(nullptr);
  canon["images"] = json::array();
  for (const auto& img : req.images) {
    canon["images"].push_back({{"role", img.role}, {"sha256", img.bytes.empty() ? "" : sha256_hex(img.bytes)},
                               {"uri", img.bytes.empty() ? img.uri : ""}});
  }
  return sha256_hex(canon.dump());
}

std::shared_ptr<Transport> transport_for(const ProviderConfig& config) {
  if (config.endpoint.rfind("mock://", 0) == 0) return make_mock_transport();
  if (config.endpoint.rfind("http://", 0) == 0 || config.endpoint.rfind("https://", 0) == 0) {
    return make_openai_transport();
  }
  raise(ErrorCode::kInvalidArgument, "provider " + config.name + ": unsupported endpoint scheme " + config.endpoint);
}

Client::Client(ProviderConfig config, std::shared_ptr<Transport> transport, Sleeper sleeper)
    : config_(std::move(config)),
      transport_(transport ? std::move(transport) : transport_for(config_)),
      sleeper_(sleeper ? std::move(sleeper) : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })) {
  validate(config_);
}

std::chrono::milliseconds Client::backoff_delay(const ProviderConfig& config, int retry) {
  if (retry < 1) return std::chrono::milliseconds(0);
  const std::int64_t cap = config.backoff_cap_ms;
  std::int64_t d = config.backoff_base_ms;
  for (int i = 1; i < retry && d < cap; ++i) d *= 2;
  return std::chrono::milliseconds(std::min(d, cap));
}

void Client::audit(const ChatRequest& req, const AttemptResult& res, int attempt) const {
  if (config_.audit_log.empty()) return;
  static constexpr const char* kKinds[] = {"ok", "http_error", "transport_error", "timeout"};
  json line = {{"ts", utc_now()},
               {"provider", config_.name},
               {"model_id", config_.model_id},
               {"endpoint", config_.endpoint},
               {"tag", req.tag},
               {"request_hash", request_hash(config_, req)},
               {"attempt", attempt},
               {"prompt", req.prompt},
               {"outcome", kKinds[static_cast<int>(res.kind)]},
               {"status", res.status},
               {"response", res.kind == AttemptResult::Kind::kOk ? res.text : res.body}};
  std::lock_guard lock(audit_mu_);
  std::ofstream out(config_.audit_log, std::ios::app);
  out << line.dump() << '\n';
}

Completion Client::complete(const ChatRequest& req) const {
  validate(req);
  std::string api_key;
  if (!config_.auth_env_var.empty()) {
    const char* v = std::getenv(config_.auth_env_var.c_str());
    if (v == nullptr || *v == '\0') {
      raise(ErrorCode::kAuthMissing, "provider " + config_.name + ": environment variable " + config_.auth_env_var + " is not set");
    }
    api_key = v;
  }

  requests_.fetch_add(1);
  const int now_in_flight = in_flight_.fetch_add(1) + 1;
  int peak = in_flight_peak_.load();
  while (now_in_flight > peak && !in_flight_peak_.compare_exchange_weak(peak, now_in_flight)) {
  }
  struct Leave {
    std::atomic<int>& n;
    ~Leave() { n.fetch_sub(1); }
  } leave{in_flight_};

  const auto start = std::chrono::steady_clock::now();
  AttemptResult last;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      retries_.fetch_add(1);
      sleeper_(backoff_delay(config_, attempt));
    }
    attempts_.fetch_add(1);
    last = transport_->send(config_, req, api_key);
    audit(req, last, attempt);
    switch (last.kind) {
      case AttemptResult::Kind::kOk: {
        Completion c;
        c.text = std::move(last.text);
        c.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
        c.retry_count = attempt;
        return c;
      }
      case AttemptResult::Kind::kHttpError:
        if (last.status != 429 && last.status < 500) {
          failures_.fetch_add(1);
          raise(ErrorCode::kProviderError,
                "provider " + config_.name + ": HTTP " + std::to_string(last.status) + ": " + last.body);
        }
        break;
      case AttemptResult::Kind::kTransportError:
      case AttemptResult::Kind::kTimeout:
        break;
    }
  }
  failures_.fetch_add(1);
  const std::string tries = " after " + std::to_string(config_.max_retries + 1) + " attempts";
  if (last.kind == AttemptResult::Kind::kTimeout) raise(ErrorCode::kTimeout, "provider " + config_.name + ": timeout" + tries);
  if (last.status == 429) raise(ErrorCode::kRateLimited, "provider " + config_.name + ": rate limited" + tries);
  raise(ErrorCode::kProviderError, "provider " + config_.name + ": HTTP " + std::to_string(last.status) + tries + ": " + last.body);
}

std::vector<BatchItem> Client::batch_complete(std::span<const ChatRequest> reqs) const {
  std::vector<BatchItem> out(reqs.size());
  if (reqs.empty()) return out;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < reqs.size(); i = next.fetch_add(1)) {
      out[i].index = i;
      try {
        out[i].result = complete(reqs[i]);
      } catch (const Error& e) {
        out[i].result = BatchError{e.code(), e.what()};
      } catch (const std::exception& e) {
        out[i].result = BatchError{ErrorCode::kProviderError, e.what()};
      }
    }
  };
  const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(config_.max_parallel), reqs.size());
  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  for (std::size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return out;
}

Telemetry Client::telemetry() const {
  return Telemetry{requests_.load(), attempts_.load(), retries_.load(), failures_.load(), in_flight_peak_.load()};
}

ProviderRegistry ProviderRegistry::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file_text(path));
  } catch (const json::exception& e) {
    raise(ErrorCode::kInvalidArgument, "provider config " + path.string() + ": " + e.what());
  }
  return from_json(j, std::filesystem::absolute(path).parent_path());
}

ProviderRegistry ProviderRegistry::from_json(const json& j, const std::filesystem::path& base_dir) {
  ProviderRegistry reg;
  try {
    for (const auto& p : j.at("providers")) {
      auto c = provider_from_json(p, base_dir);
      reg.providers_[c.name] = std::move(c);
    }
  } catch (const json::exception& e) {
    raise(ErrorCode::kInvalidArgument, std::string("provider config: ") + e.what());
  }
  return reg;
}

const ProviderConfig& ProviderRegistry::get(const std::string& name) const {
  auto it = providers_.find(name);
  if (it == providers_.end()) raise(ErrorCode::kNotFound, "unknown provider '" + name + "'");
  return it->second;
}

std::vector<std::string> ProviderRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : providers_) out.push_back(k);
  return out;
}

}  // namespace editfactory::providers
