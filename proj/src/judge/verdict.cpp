#include <regex>
#include <string>

#include "core/json_scan.hpp"
#include "editfactory/error.hpp"
#include "editfactory/judge.hpp"
#include "editfactory/util.hpp"

namespace editfactory::judge {

namespace {

// Drops ``` fence lines; sets `stripped` when any were present.
std::string strip_fences(std::string_view raw, bool& stripped) {
  std::string out;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    const std::string_view line = raw.substr(pos, nl - pos);
    if (trim(line).rfind("```", 0) == 0) {
      stripped = true;
    } else {
      out.append(line);
      out += '\n';
    }
    pos = nl + 1;
  }
  return out;
}

bool on_grid(Dimension d, Decimal score) {
  // Accuracy is integral, Completeness moves in half steps, Clarity in tenths.
  std::int64_t step = Decimal::kScale;
  if (d == Dimension::kCompleteness) step = Decimal::kScale / 2;
  if (d == Dimension::kClarity) step = Decimal::kScale / 10;
  return score.units() % step == 0;
}

}  // namespace

std::optional<CoverageHits> parse_coverage_hits(std::string_view reasoning) {
  static const std::regex re(R"((\d+(?:\.\d+)?)\s+changes?,\s*(\d+(?:\.\d+)?)\s+hits?)", std::regex::icase);
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(reasoning.begin(), reasoning.end(), m, re)) return std::nullopt;
  const Decimal total = Decimal::parse(m[1].str());
  if (total.units() % Decimal::kScale != 0) return std::nullopt;
  CoverageHits h;
  h.total = static_cast<int>(total.units() / Decimal::kScale);
  h.hits = Decimal::parse(m[2].str());
  return h;
}

JudgeVerdict parse_verdict(Dimension expected, std::string_view raw) {
  JudgeVerdict v;
  v.dimension = expected;
  v.raw = std::string(raw);
  const std::string text = strip_fences(raw, v.lenient);
  const auto found = detail::last_json_object(text);
  if (!found) raise(ErrorCode::kUnparseable, "no JSON object in judge response");
  if (!found->single_line) v.lenient = true;
  const nlohmann::json& j = found->value;

  auto dim = j.find("dimension");
  if (dim == j.end() || !dim->is_string()) raise(ErrorCode::kUnparseable, "verdict lacks a dimension field");
  const auto parsed_dim = parse_dimension(dim->get<std::string>());
  if (!parsed_dim || *parsed_dim != expected) {
    raise(ErrorCode::kDimensionMismatch,
          "expected " + std::string(to_string(expected)) + ", got " + dim->get<std::string>());
  }

  auto score = j.find("score");
  if (score == j.end()) raise(ErrorCode::kUnparseable, "verdict lacks a score field");
  try {
    if (score->is_number()) {
      v.score = Decimal::from_double(score->get<double>(), 6);
    } else if (score->is_string()) {
      v.score = Decimal::parse(trim(score->get<std::string>()));
      v.lenient = true;
    } else {
      raise(ErrorCode::kUnparseable, "score is not numeric");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kUnparseable) throw;
    raise(ErrorCode::kUnparseable, std::string("score is not numeric: ") + e.what());
  }
  if (v.score < Decimal::from_int(1) || v.score > Decimal::from_int(5)) {
    raise(ErrorCode::kScoreOutOfRange, "score " + v.score.to_canonical() + " outside [1,5]");
  }
  if (!on_grid(expected, v.score)) {
    raise(ErrorCode::kScoreOutOfRange,
          "score " + v.score.to_canonical() + " is off the " + std::string(to_string(expected)) + " grid");
  }

  if (auto r = j.find("reasoning"); r != j.end() && r->is_string()) v.reasoning = r->get<std::string>();
  if (auto h = j.find("hallucination"); h != j.end() && h->is_boolean()) v.hallucination = h->get<bool>();
  if (expected == Dimension::kCompleteness) v.hits = parse_coverage_hits(v.reasoning);
  return v;
}

}  // namespace editfactory::judge
