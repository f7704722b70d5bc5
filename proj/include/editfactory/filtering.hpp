#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "editfactory/providers.hpp"
#include "editfactory/records.hpp"
#include "editfactory/store.hpp"

namespace editfactory::filtering {

using corpus::EditScoreResult;
using corpus::TripletRecord;

/// Merges the two scorer facets into the scalar used for gating.
///   product:    success * (1 - overedit)            (default)
///   weighted:w  w * success + (1 - w) * (1 - overedit)
struct Combiner {
  enum class Kind { kProduct, kWeighted };
  Kind kind = Kind::kProduct;
  double success_weight = 0.5;

  double combine(double success, double overedit) const;
  std::string name() const;
  static Combiner parse(const std::string& spec);
};

// Normalizes both facets by `scale` (the scorer's maximum) onto [0,1].
EditScoreResult make_score(double success, double overedit, double scale, const std::string& scorer_model,
                           const Combiner& combiner);

// Expects a JSON object {"editing_success":x,"overedit_degree":y[,"scale":s]}
// somewhere in the text (last object wins). Throws kUnparseable.
EditScoreResult parse_score_response(std::string_view text, const std::string& scorer_model, const Combiner& combiner);

providers::ChatRequest build_score_request(const corpus::Store& store, const corpus::ImagePair& pair,
                                           const corpus::Instruction& instruction);

// Scores one (pair, instruction) and, when a triplet exists for the pair,
// persists the result onto it.
EditScoreResult score(corpus::Store& store, const corpus::ImagePair& pair, const corpus::Instruction& instruction,
                      const providers::Client& scorer, const Combiner& combiner = {});

struct ScoreBatchReport {
  std::size_t scored = 0;
  std::vector<std::pair<std::string, std::string>> failed;  // (pair_id, message)
};

// Scores every Drafted triplet lacking a result, concurrently under the
// scorer's in-flight bound.
ScoreBatchReport score_pending(corpus::Store& store, const providers::Client& scorer, const Combiner& combiner = {});

struct PartitionResult {
  std::vector<TripletRecord> kept;
  std::vector<TripletRecord> discarded;
  double retention = 0;
  std::string rule;  // human-readable gate description
};

// kept = aggregate >= threshold (ties kept). Throws kMissingScore.
PartitionResult partition(std::span<const TripletRecord> records, double threshold);

struct FacetThresholds {
  double min_success = 0;
  double max_overedit = 1;
};
PartitionResult partition_by_facets(std::span<const TripletRecord> records, const FacetThresholds& facets);

// Smallest threshold that keeps round(target * n) records (more on ties).
double threshold_for_retention(std::span<const TripletRecord> records, double target_retention);

// Kept records move to Filtered, discarded ones to Rejected.
void apply_partition(corpus::Store& store, const PartitionResult& result);

nlohmann::json retention_report_json(const PartitionResult& result);
std::string retention_report_markdown(const PartitionResult& result);

}  // namespace editfactory::filtering
