#include <string>

#include "core/assets.hpp"
#include "editfactory/error.hpp"
#include "editfactory/judge.hpp"

namespace editfactory::judge {

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::kAccuracy: return "accuracy";
    case Dimension::kCompleteness: return "completeness";
    case Dimension::kClarity: return "clarity";
  }
  return "unknown";
}

std::optional<Dimension> parse_dimension(std::string_view name) {
  for (Dimension d : kAllDimensions) {
    const std::string_view n = to_string(d);
    if (n.size() != name.size()) continue;
    bool eq = true;
    for (std::size_t i = 0; i < n.size() && eq; ++i) {
      char c = name[i];
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      eq = c == n[i];
    }
    if (eq) return d;
  }
  return std::nullopt;
}

std::string_view prompt_template(Dimension d) {
  switch (d) {
    case Dimension::kAccuracy: return assets::accuracy_prompt_v1;
    case Dimension::kCompleteness: return assets::completeness_prompt_v1;
    case Dimension::kClarity: return assets::clarity_prompt_v1;
  }
  return {};
}

namespace {

void append_numbered(std::string& out, const std::vector<std::string>& items) {
  if (items.empty()) {
    out += "(none)\n";
    return;
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    out += std::to_string(i + 1) + ". " + items[i] + "\n";
  }
}

}  // namespace

std::string format_gt_changes(const corpus::GroundTruth& gt) {
  std::string out = "[Primary Changes]\n";
  append_numbered(out, gt.primary_changes);
  out += "[Secondary Changes]\n";
  append_numbered(out, gt.secondary_changes);
  out.pop_back();
  return out;
}

std::string format_gt_text(const corpus::GroundTruth& gt) {
  return format_gt_changes(gt) + "\n[Overall Description]\n" + gt.overall_description;
}

std::string substitute(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const std::size_t close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto it = vars.find(std::string(tmpl.substr(i + 1, close - i - 1)));
        if (it != vars.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

std::string render_prompt(Dimension d, const corpus::GroundTruth& gt, std::string_view instruction,
                          std::string_view model_name) {
  if (gt.primary_changes.empty()) {
    raise(ErrorCode::kEmptyGroundTruth, "ground truth for " + gt.pair_id + " has no primary changes");
  }
  const std::map<std::string, std::string> vars = {
      {"gt_text", format_gt_text(gt)},
      {"gt_changes", format_gt_changes(gt)},
      {"instruction", std::string(instruction)},
      {"model_name", std::string(model_name)},
  };
  return substitute(prompt_template(d), vars);
}

}  // namespace editfactory::judge
