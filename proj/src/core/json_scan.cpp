#include "json_scan.hpp"

#include <vector>

namespace editfactory::detail {

using nlohmann::json;

namespace {

// Returns the end (one past '}') of the balanced object starting at `open`,
// honoring string literals, or npos.
std::size_t match_object(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

std::optional<json> last_object_in(std::string_view s) {
  std::optional<json> found;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '{') continue;
    const std::size_t end = match_object(s, i);
    if (end == std::string_view::npos) continue;
    json j = json::parse(s.substr(i, end - i), nullptr, false);
    if (!j.is_discarded() && j.is_object()) {
      found = std::move(j);
      i = end - 1;
    }
  }
  return found;
}

}  // namespace

std::optional<ScannedObject> last_json_object(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    lines.push_back(text.substr(start, end - start));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    if (auto j = last_object_in(*it)) return ScannedObject{std::move(*j), true};
  }
  if (auto j = last_object_in(text)) return ScannedObject{std::move(*j), false};
  return std::nullopt;
}

}  // namespace editfactory::detail
