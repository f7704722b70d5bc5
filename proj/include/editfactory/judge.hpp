#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "editfactory/decimal.hpp"
#include "editfactory/records.hpp"
#include "editfactory/scanner.hpp"

namespace editfactory::judge {

enum class Dimension { kAccuracy, kCompleteness, kClarity };

inline constexpr Dimension kAllDimensions[] = {Dimension::kAccuracy, Dimension::kCompleteness, Dimension::kClarity};

// Lower-case wire names: "accuracy", "completeness", "clarity".
std::string_view to_string(Dimension d);
std::optional<Dimension> parse_dimension(std::string_view name);

// ---------------------------------------------------------------------------
// Prompts

inline constexpr std::string_view kPromptVersion = "v1";

std::string_view prompt_template(Dimension d);

// GT block for {gt_text}: numbered primary and secondary changes plus the
// overall description. {gt_changes} omits the description.
std::string format_gt_text(const corpus::GroundTruth& gt);
std::string format_gt_changes(const corpus::GroundTruth& gt);

// Replaces each {name} whose name is a key of `vars`, in one left-to-right
// pass. Substituted text is never rescanned; other braces pass through.
std::string substitute(std::string_view tmpl, const std::map<std::string, std::string>& vars);

// Throws kEmptyGroundTruth when gt.primary_changes is empty.
std::string render_prompt(Dimension d, const corpus::GroundTruth& gt, std::string_view instruction,
                          std::string_view model_name);

// ---------------------------------------------------------------------------
// Verdicts

// "N changes, K hits" from Completeness reasoning. K may be a half-integer.
struct CoverageHits {
  Decimal hits;
  int total = 0;
};

struct JudgeVerdict {
  Dimension dimension = Dimension::kAccuracy;
  Decimal score;
  std::string reasoning;
  std::string raw;
  bool lenient = false;  // fences stripped, multi-line object, or quoted score
  std::optional<CoverageHits> hits;
  std::optional<bool> hallucination;  // explicit "hallucination" field, if present
};

std::optional<CoverageHits> parse_coverage_hits(std::string_view reasoning);

// Strict parse of the last single-line JSON object in `raw`.
// Throws kUnparseable, kDimensionMismatch or kScoreOutOfRange.
JudgeVerdict parse_verdict(Dimension expected, std::string_view raw);

// ---------------------------------------------------------------------------
// Rubric

// Base score by coverage R: 5 at R=1, 4 on [0.6,1), 3 on [0.2,0.6), 2 on
// (0,0.2), 1 at R=0; +0.5 when 0<R<1 and every secondary change is covered.
Decimal completeness_lookup(double coverage, bool all_secondary_covered);
// Same bands evaluated exactly on K/N.
Decimal completeness_from_hits(Decimal hits, int total, bool all_secondary_covered);

// 5.0 / 3.0 / 2.5 / 2.0 for 0 / 1 / 2 / 3+ forbidden-term hits.
Decimal clarity_ceiling(std::size_t n_hits);

// True when the verdict carries the hallucination marker, either the explicit
// boolean field or an un-negated "hallucinat..." mention in the reasoning.
bool reports_hallucination(const JudgeVerdict& v);

struct ClampEvent {
  std::string rule;
  Decimal before;
  Decimal after;
  std::string detail;
  bool inconsistency = false;  // judge arithmetic disagreed with the rubric
};

struct ValidatedScore {
  Decimal score;
  std::vector<ClampEvent> log;
};

ValidatedScore enforce_constraints(Dimension d, const JudgeVerdict& verdict, std::span<const ForbiddenTermHit> hits);

struct CompositeScore {
  Decimal accuracy;
  Decimal completeness;
  Decimal clarity;
  Decimal weighted;  // 0.4*accuracy + 0.4*completeness + 0.2*clarity, exact
};

// Throws kInputOutOfRange unless every input lies in [1,5].
CompositeScore composite(Decimal accuracy, Decimal completeness, Decimal clarity);
// Same arithmetic without the range check, for means and published rows.
Decimal weighted_sum(Decimal accuracy, Decimal completeness, Decimal clarity);

}  // namespace editfactory::judge
