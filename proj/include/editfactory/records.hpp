#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "editfactory/taxonomy.hpp"

namespace editfactory::corpus {

struct ImagePair {
  std::string id;             // sha256 over both images, see pair_id_for()
  std::string source_uri;
  std::string target_uri;
  std::string source_object;  // content hash of the stored source bytes
  std::string target_object;
  TaxonomyLabel taxonomy{};
  std::string created_at;
  std::map<std::string, std::string> meta;
};

enum class ProducerKind { kModel, kHuman };

struct Producer {
  ProducerKind kind = ProducerKind::kModel;
  std::string id;  // model_id or annotator_id
  friend bool operator==(const Producer&, const Producer&) = default;
};

struct Instruction {
  std::string text;
  Producer producer;
  std::string created_at;
  friend bool operator==(const Instruction&, const Instruction&) = default;
};

// Throws kInvalidArgument when the text is blank.
Instruction make_instruction(std::string text, Producer producer, std::string created_at);

struct EditScoreResult {
  double editing_success = 0;
  double overedit_degree = 0;
  double aggregate = 0;
  std::string scorer_id;
};

enum class TripletStatus { kDrafted, kFiltered, kRefinementPending, kRefined, kRejected };

std::string_view to_string(TripletStatus status);
std::optional<TripletStatus> parse_status(std::string_view name);
// Forward along Drafted -> Filtered -> RefinementPending -> Refined, or to
// Rejected from any non-terminal state.
bool can_transition(TripletStatus from, TripletStatus to);

struct TripletRecord {
  std::string pair_id;
  Instruction draft;
  std::optional<Instruction> refined;
  std::optional<EditScoreResult> filter_result;
  TripletStatus status = TripletStatus::kDrafted;
};

struct GroundTruth {
  std::string pair_id;
  std::vector<std::string> primary_changes;
  std::vector<std::string> secondary_changes;
  std::string overall_description;
};

// Rejects empty strings inside either change list.
void validate(const GroundTruth& gt);

void to_json(nlohmann::json& j, const TaxonomyLabel& v);
void from_json(const nlohmann::json& j, TaxonomyLabel& v);
void to_json(nlohmann::json& j, const ImagePair& v);
void from_json(const nlohmann::json& j, ImagePair& v);
void to_json(nlohmann::json& j, const Producer& v);
void from_json(const nlohmann::json& j, Producer& v);
void to_json(nlohmann::json& j, const Instruction& v);
void from_json(const nlohmann::json& j, Instruction& v);
void to_json(nlohmann::json& j, const EditScoreResult& v);
void from_json(const nlohmann::json& j, EditScoreResult& v);
void to_json(nlohmann::json& j, const TripletRecord& v);
void from_json(const nlohmann::json& j, TripletRecord& v);
void to_json(nlohmann::json& j, const GroundTruth& v);
void from_json(const nlohmann::json& j, GroundTruth& v);

}  // namespace editfactory::corpus
