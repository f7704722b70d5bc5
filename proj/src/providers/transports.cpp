#include <filesystem>

#include "core/http_client.hpp"
#include "editfactory/providers.hpp"

namespace editfactory::providers {

using nlohmann::json;

namespace {

class OpenAITransport final : public Transport {
 public:
  AttemptResult send(const ProviderConfig& config, const ChatRequest& req, const std::string& api_key) override {
    json content = json::array();
    static constexpr const char* kLabels[] = {"Image A (source):", "Image B (target):"};
    for (std::size_t i = 0; i < req.images.size(); ++i) {
      const auto& img = req.images[i];
      content.push_back({{"type", "text"}, {"text", kLabels[i]}});
      const bool remote = img.uri.rfind("http://", 0) == 0 || img.uri.rfind("https://", 0) == 0;
      std::string url = (config.uri_passthrough && remote) || img.bytes.empty()
                            ? img.uri
                            : "data:" + img.mime + ";base64," + base64_encode(img.bytes);
      content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
    }
    content.push_back({{"type", "text"}, {"text", req.prompt}});
    json body = {{"model", config.model_id},
                 {"temperature", req.temperature},
                 {"messages", json::array({{{"role", "user"}, {"content", content}}})}};
    if (req.seed) body["seed"] = *req.seed;

    std::map<std::string, std::string> headers;
    if (!api_key.empty()) headers["Authorization"] = "Bearer " + api_key;
    const auto timeout = std::chrono::milliseconds(static_cast<std::int64_t>(config.timeout_s * 1000));
    auto res = detail::http_request("POST", config.endpoint, headers, body.dump(), "application/json", timeout);

    AttemptResult out;
    if (!res.transport_ok) {
      out.kind = res.timed_out ? AttemptResult::Kind::kTimeout : AttemptResult::Kind::kTransportError;
      out.body = res.error;
      return out;
    }
    out.status = res.status;
    if (res.status != 200) {
      out.kind = AttemptResult::Kind::kHttpError;
      out.body = res.body;
      return out;
    }
    try {
      const json j = json::parse(res.body);
      out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
      out.kind = AttemptResult::Kind::kOk;
    } catch (const json::exception&) {
      // Unusable 200 body: not retried.
      out.kind = AttemptResult::Kind::kHttpError;
      out.status = 422;
      out.body = res.body;
    }
    return out;
  }
};

class MockTransport final : public Transport {
 public:
  AttemptResult send(const ProviderConfig& config, const ChatRequest& req, const std::string&) override {
    const std::string where = config.endpoint.substr(std::string("mock://").size());
    AttemptResult out;
    if (where == "echo") {
      out.text = req.prompt;
      return out;
    }
    const std::filesystem::path dir = where;
    std::vector<std::filesystem::path> candidates = {dir / (request_hash(config, req) + ".txt")};
    if (!req.tag.empty()) candidates.push_back(dir / "tags" / (sanitize_filename(req.tag) + ".txt"));
    candidates.push_back(dir / "default.txt");
    for (const auto& p : candidates) {
      if (std::filesystem::exists(p)) {
        out.text = read_file_text(p);
        return out;
      }
    }
    out.kind = AttemptResult::Kind::kHttpError;
    out.status = 404;
    out.body = "no fixture for request " + request_hash(config, req) + (req.tag.empty() ? "" : " tag " + req.tag);
    return out;
  }
};

}  // namespace

std::shared_ptr<Transport> make_openai_transport() { return std::make_shared<OpenAITransport>(); }
std::shared_ptr<Transport> make_mock_transport() { return std::make_shared<MockTransport>(); }

}  // namespace editfactory::providers
