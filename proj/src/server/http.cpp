#include <httplib.h>

#include <thread>

#include "editfactory/error.hpp"
#include "editfactory/evaluation.hpp"
#include "editfactory/human_eval.hpp"
#include "editfactory/image_probe.hpp"
#include "editfactory/reporting.hpp"
#include "editfactory/server.hpp"
#include "editfactory/util.hpp"

namespace editfactory::server {

using nlohmann::json;

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return 200;
    case ErrorCode::kUnauthorized: return 401;
    case ErrorCode::kNotClaimant: return 403;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kEmptyDataset: return 404;
    case ErrorCode::kLeaseExpired:
    case ErrorCode::kTaskClosed:
    case ErrorCode::kDuplicateAnnotation:
    case ErrorCode::kIncompleteDataset:
    case ErrorCode::kInvalidTransition: return 409;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kIllegalSeverityForCategory:
    case ErrorCode::kHierarchyViolation:
    case ErrorCode::kIdenticalTexts:
    case ErrorCode::kUnknownDraft:
    case ErrorCode::kEmptyModes: return 422;
    default: return 500;
  }
}

ServerConfig server_config_from_json(const json& j) {
  ServerConfig c;
  c.bind = j.value("bind", c.bind);
  c.port = j.value("port", c.port);
  c.cors_origin = j.value("cors_origin", c.cors_origin);
  c.lease = std::chrono::seconds(j.value("lease_seconds", static_cast<long long>(c.lease.count())));
  if (auto t = j.find("tokens"); t != j.end()) {
    for (const auto& [token, annotator] : t->items()) c.tokens[token] = annotator.get<std::string>();
  }
  if (j.contains("verdicts_dir")) c.verdicts_dir = j.at("verdicts_dir").get<std::string>();
  if (c.lease.count() <= 0) raise(ErrorCode::kInvalidArgument, "lease_seconds must be positive");
  return c;
}

struct Server::Impl {
  corpus::Store& store;
  ServerConfig config;
  TaskQueue queue;
  httplib::Server http;
  std::thread thread;

  Impl(corpus::Store& s, ServerConfig c, NowFn now)
      : store(s), config(std::move(c)), queue(s, config.lease, std::move(now)) {
    if (config.verdicts_dir.empty()) config.verdicts_dir = store.data_dir() / "verdicts";
    routes();
  }

  static void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
    send_json(res, http_status_for(code), {{"error", {{"code", error_code_name(code)}, {"message", message}}}});
  }

  std::string authenticate(const httplib::Request& req) const {
    const std::string header = req.get_header_value("Authorization");
    const std::string prefix = "Bearer ";
    if (header.rfind(prefix, 0) == 0) {
      auto it = config.tokens.find(trim(std::string_view(header).substr(prefix.size())));
      if (it != config.tokens.end()) return it->second;
    }
    raise(ErrorCode::kUnauthorized, "missing or unknown bearer token");
  }

  // Runs a handler with authentication and error mapping.
  httplib::Server::Handler guarded(std::function<void(const httplib::Request&, httplib::Response&, const std::string&)> fn,
                                   bool auth = true) {
    return [this, fn = std::move(fn), auth](const httplib::Request& req, httplib::Response& res) {
      try {
        const std::string annotator = auth ? authenticate(req) : std::string();
        fn(req, res, annotator);
      } catch (const Error& e) {
        send_error(res, e.code(), e.what());
      } catch (const json::exception& e) {
        send_json(res, 400, {{"error", {{"code", "BadRequest"}, {"message", e.what()}}}});
      } catch (const std::exception& e) {
        send_json(res, 500, {{"error", {{"code", "Internal"}, {"message", e.what()}}}});
      }
    };
  }

  static json task_view(const Claim& c) {
    json j = c.task;
    j["lease_expires_at"] = format_utc(c.lease.expires);
    j["images"] = {{"source", "/api/pairs/" + c.task.pair_id + "/image?which=source"},
                   {"target", "/api/pairs/" + c.task.pair_id + "/image?which=target"}};
    return j;
  }

  void routes() {
    http.Get("/api/health", guarded([](auto&, auto& res, auto&) { send_json(res, 200, {{"status", "ok"}}); }, false));
    http.Get("/api/spec", guarded([](auto&, auto& res, auto&) { send_json(res, 200, openapi_document()); }, false));

    http.Get("/api/checklist", guarded([](auto&, auto& res, auto&) {
               send_json(res, 200, human_eval::Checklist::builtin().raw());
             }));

    http.Get("/api/tasks/next", guarded([this](const httplib::Request& req, httplib::Response& res, const std::string& who) {
               const auto kind = tasks::parse_task_kind(req.get_param_value("kind"));
               if (!kind) raise(ErrorCode::kInvalidArgument, "kind must be refine, preference or human_eval");
               const auto claim = queue.claim_next(*kind, who);
               if (!claim) {
                 res.status = 204;
                 return;
               }
               send_json(res, 200, task_view(*claim));
             }));

    http.Post(R"(/api/tasks/([^/]+)/submit)",
              guarded([this](const httplib::Request& req, httplib::Response& res, const std::string& who) {
                const json body = json::parse(req.body);
                send_json(res, 200, queue.submit(req.matches[1].str(), who, body));
              }));

    http.Get(R"(/api/pairs/([^/]+)/image)",
             guarded([this](const httplib::Request& req, httplib::Response& res, const std::string&) {
               const std::string which = req.has_param("which") ? req.get_param_value("which") : "source";
               if (which != "source" && which != "target") raise(ErrorCode::kInvalidArgument, "which must be source or target");
               const auto pair = store.pair(req.matches[1].str());
               if (!pair) raise(ErrorCode::kNotFound, "unknown pair " + req.matches[1].str());
               const std::string& hash = which == "source" ? pair->source_object : pair->target_object;
               const std::string etag = "\"" + hash + "\"";
               res.set_header("ETag", etag);
               res.set_header("Cache-Control", "private, max-age=0, must-revalidate");
               const std::string inm = req.get_header_value("If-None-Match");
               if (!inm.empty() && (inm == etag || inm == "*" || inm.find(etag) != std::string::npos)) {
                 res.status = 304;
                 return;
               }
               auto bytes = store.read_object(hash);
               if (!bytes) raise(ErrorCode::kNotFound, "image object missing for pair " + pair->id);
               const auto info = corpus::probe_image(*bytes);
               res.status = 200;
               res.set_content(std::string(bytes->begin(), bytes->end()),
                               info ? info->mime.c_str() : "application/octet-stream");
             }));

    http.Get(R"(/api/reports/([^/]+))",
             guarded([this](const httplib::Request& req, httplib::Response& res, const std::string&) {
               const std::string kind = req.matches[1].str();
               const std::string dataset = req.get_param_value("dataset");
               if (dataset.empty()) raise(ErrorCode::kInvalidArgument, "dataset parameter is required");
               const std::string fmt_name = req.has_param("format") ? req.get_param_value("format") : "json";
               const auto fmt = reporting::parse_format(fmt_name);
               if (!fmt) raise(ErrorCode::kInvalidArgument, "format must be md, csv or json");
               std::string body;
               if (kind == "objective") {
                 const auto samples = judge::read_verdict_archive(config.verdicts_dir / sanitize_filename(dataset));
                 body = reporting::render(reporting::benchmark_report(dataset, samples), *fmt);
               } else if (kind == "human") {
                 body = reporting::render(reporting::human_report(store, dataset), *fmt);
               } else {
                 raise(ErrorCode::kNotFound, "unknown report kind " + kind);
               }
               const char* type = *fmt == reporting::Format::kJson  ? "application/json"
                                  : *fmt == reporting::Format::kCsv ? "text/csv"
                                                                    : "text/markdown";
               res.status = 200;
               res.set_content(body, type);
             }));

    if (!config.cors_origin.empty()) {
      http.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
      http.set_post_routing_handler([origin = config.cors_origin](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Authorization, Content-Type, If-None-Match");
        res.set_header("Access-Control-Expose-Headers", "ETag");
        res.set_header("Vary", "Origin");
      });
    }
  }

  int bind() {
    int port = config.port;
    if (port == 0) {
      port = http.bind_to_any_port(config.bind);
    } else if (!http.bind_to_port(config.bind, port)) {
      port = -1;
    }
    if (port < 0) raise(ErrorCode::kIo, "cannot bind " + config.bind + ":" + std::to_string(config.port));
    config.port = port;
    return port;
  }
};

Server::Server(corpus::Store& store, ServerConfig config, NowFn now)
    : impl_(std::make_unique<Impl>(store, std::move(config), std::move(now))) {}

Server::~Server() { stop(); }

int Server::start() {
  const int port = impl_->bind();
  impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return port;
}

void Server::run() {
  impl_->bind();
  impl_->http.listen_after_bind();
}

void Server::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

TaskQueue& Server::queue() { return impl_->queue; }

}  // namespace editfactory::server
