#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "editfactory/decimal.hpp"
#include "editfactory/evaluation.hpp"
#include "editfactory/human_eval.hpp"

namespace editfactory::reporting {

enum class Format { kMarkdown, kCsv, kJson };

// "md", "csv", "json".
std::optional<Format> parse_format(std::string_view s);

struct ModelSummary {
  std::string model;
  Decimal mean_accuracy;
  Decimal mean_completeness;
  Decimal mean_clarity;
  Decimal mean_weighted;       // mean of per-sample composites (canonical)
  Decimal composite_of_means;  // weighted sum of the three means, for cross-checking
  std::size_t n_evaluated = 0;
  std::size_t n_unevaluated = 0;
};

struct BenchmarkReport {
  std::string dataset;
  std::vector<ModelSummary> models;  // ordered by model name
};

// Means over evaluated samples; Unevaluated ones are only counted.
// Throws kEmptyDataset when there are no samples or a model has no
// evaluated sample.
BenchmarkReport benchmark_report(const std::string& dataset, std::span<const judge::SampleEvaluation> samples);

struct HumanModelRow {
  std::string model;
  human_eval::Rates rates;
};

struct HumanReport {
  std::string dataset;
  std::vector<HumanModelRow> models;  // ordered by model name
};

HumanReport human_report(const corpus::Store& store, const std::string& dataset);

// Dimension means at two decimals, S at three, rates at two; best value per
// column in bold, second best underlined (Markdown only).
std::string render(const BenchmarkReport& r, Format f);
std::string render(const HumanReport& r, Format f);

nlohmann::json to_json(const BenchmarkReport& r);
nlohmann::json to_json(const HumanReport& r);

}  // namespace editfactory::reporting
