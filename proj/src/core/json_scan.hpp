#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace editfactory::detail {

struct ScannedObject {
  nlohmann::json value;
  bool single_line = true;
};

// Finds the last JSON object in free text. Single-line objects are preferred,
// scanning lines from the end; failing that, the last balanced {...} block
// spanning several lines is tried.
std::optional<ScannedObject> last_json_object(std::string_view text);

}  // namespace editfactory::detail
