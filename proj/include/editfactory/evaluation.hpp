#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "editfactory/dataset.hpp"
#include "editfactory/judge.hpp"
#include "editfactory/providers.hpp"
#include "editfactory/store.hpp"

namespace editfactory::judge {

struct DimensionResult {
  Dimension dimension = Dimension::kAccuracy;
  std::string prompt_hash;  // request_hash of the call, for audit
  std::string raw;          // provider text; empty when the call failed
  std::optional<JudgeVerdict> verdict;
  std::vector<ForbiddenTermHit> forbidden_terms;  // Clarity only
  std::optional<ValidatedScore> validated;
  std::optional<ErrorCode> error;
  std::string error_message;
};

struct SampleEvaluation {
  std::string pair_id;
  std::string model;
  std::string instruction;
  std::array<DimensionResult, 3> dimensions;  // accuracy, completeness, clarity
  std::optional<CompositeScore> composite;    // set only when all three validated

  bool evaluated() const { return composite.has_value(); }
  const DimensionResult& dimension(Dimension d) const { return dimensions[static_cast<int>(d)]; }
};

nlohmann::json to_json(const SampleEvaluation& s);
// Reads back the fields reports need: identity, per-dimension validated
// scores, errors and the composite.
SampleEvaluation sample_from_json(const nlohmann::json& j);

// Request for one dimension: pair images plus the rendered prompt, at
// temperature 0 and seed 0. Tag is "judge:<dimension>:<model>:<pair_id>".
providers::ChatRequest build_judge_request(const corpus::Store& store, const corpus::ImagePair& pair, Dimension d,
                                           const corpus::GroundTruth& gt, const corpus::DatasetRow& row);

// Parse + enforce for one dimension's raw response. Parse errors land in the
// result rather than propagating.
DimensionResult judge_response(Dimension d, std::string_view raw, std::string_view instruction);

// Throws kNotFound without the pair or its ground truth, kEmptyGroundTruth
// when the GT has no primary changes.
SampleEvaluation evaluate_sample(const corpus::Store& store, const corpus::DatasetRow& row,
                                 const providers::Client& judge);

// All 3*N calls go through one batch. Rows lacking a pair or ground truth are
// returned Unevaluated with the error attached to every dimension.
std::vector<SampleEvaluation> evaluate_rows(const corpus::Store& store, std::span<const corpus::DatasetRow> rows,
                                            const providers::Client& judge);

// <dir>/<sanitized model>/<pair_id>.json, one file per sample.
void write_verdict_archive(const std::filesystem::path& dir, std::span<const SampleEvaluation> samples);
// Samples ordered by (model, pair_id). Throws kNotFound for a missing dir.
std::vector<SampleEvaluation> read_verdict_archive(const std::filesystem::path& dir);

}  // namespace editfactory::judge
