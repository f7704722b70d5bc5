#pragma once

#include <string_view>

namespace editfactory::assets {

extern const std::string_view accuracy_prompt_v1;
extern const std::string_view completeness_prompt_v1;
extern const std::string_view clarity_prompt_v1;
extern const std::string_view generation_prompt_v1;
extern const std::string_view editscore_prompt_v1;
extern const std::string_view checklist_v1;

}  // namespace editfactory::assets
