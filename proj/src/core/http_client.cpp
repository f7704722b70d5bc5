#include <httplib.h>

#include "http_client.hpp"

namespace editfactory::detail {

HttpResult http_request(const std::string& method, const std::string& url,
                        const std::map<std::string, std::string>& headers, const std::string& body,
                        const std::string& content_type, std::chrono::milliseconds timeout) {
  HttpResult out;
  // Split "scheme://host[:port]" from the path.
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    out.error = "malformed url " + url;
    return out;
  }
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string origin = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client cli(origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());
  cli.set_write_timeout(secs.count(), usecs.count());
  cli.set_follow_location(true);

  httplib::Headers h(headers.begin(), headers.end());
  httplib::Result res = method == "POST" ? cli.Post(path, h, body, content_type) : cli.Get(path, h);
  if (!res) {
    out.timed_out = res.error() == httplib::Error::Read || res.error() == httplib::Error::ConnectionTimeout;
    out.error = httplib::to_string(res.error());
    return out;
  }
  out.transport_ok = true;
  out.status = res->status;
  out.body = res->body;
  for (const auto& [k, v] : res->headers) out.headers[k] = v;
  return out;
}

}  // namespace editfactory::detail
