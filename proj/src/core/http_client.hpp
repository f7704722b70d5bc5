#pragma once

// Thin wrapper over cpp-httplib's client so only one translation unit pulls
// in the full header.

#include <chrono>
#include <map>
#include <string>

namespace editfactory::detail {

struct HttpResult {
  bool transport_ok = false;
  bool timed_out = false;
  int status = 0;
  std::string body;
  std::string error;
  std::map<std::string, std::string> headers;
};

HttpResult http_request(const std::string& method, const std::string& url,
                        const std::map<std::string, std::string>& headers, const std::string& body,
                        const std::string& content_type, std::chrono::milliseconds timeout);

}  // namespace editfactory::detail
