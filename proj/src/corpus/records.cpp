#include "editfactory/records.hpp"

#include "editfactory/error.hpp"
#include "editfactory/util.hpp"

namespace editfactory::corpus {

using nlohmann::json;

Instruction make_instruction(std::string text, Producer producer, std::string created_at) {
  if (trim(text).empty()) raise(ErrorCode::kInvalidArgument, "instruction text is empty");
  return Instruction{std::move(text), std::move(producer), std::move(created_at)};
}

std::string_view to_string(TripletStatus status) {
  switch (status) {
    case TripletStatus::kDrafted: return "Drafted";
    case TripletStatus::kFiltered: return "Filtered";
    case TripletStatus::kRefinementPending: return "RefinementPending";
    case TripletStatus::kRefined: return "Refined";
    case TripletStatus::kRejected: return "Rejected";
  }
  return "?";
}

std::optional<TripletStatus> parse_status(std::string_view name) {
  for (auto s : {TripletStatus::kDrafted, TripletStatus::kFiltered, TripletStatus::kRefinementPending,
                 TripletStatus::kRefined, TripletStatus::kRejected}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

bool can_transition(TripletStatus from, TripletStatus to) {
  if (from == TripletStatus::kRejected || from == TripletStatus::kRefined) return false;
  if (to == TripletStatus::kRejected) return true;
  return static_cast<int>(to) == static_cast<int>(from) + 1;
}

void validate(const GroundTruth& gt) {
  for (const auto* list : {&gt.primary_changes, &gt.secondary_changes}) {
    for (const auto& s : *list) {
      if (trim(s).empty()) raise(ErrorCode::kInvalidArgument, "ground truth for " + gt.pair_id + " has an empty change");
    }
  }
}

void to_json(json& j, const TaxonomyLabel& v) {
  j = json{{"category", to_string(v.category)}, {"subtype", to_string(v.subtype)}};
}

void from_json(const json& j, TaxonomyLabel& v) {
  v = make_label(j.at("category").get<std::string>(), j.at("subtype").get<std::string>());
}

void to_json(json& j, const ImagePair& v) {
  j = json{{"id", v.id},
           {"source_uri", v.source_uri},
           {"target_uri", v.target_uri},
           {"source_object", v.source_object},
           {"target_object", v.target_object},
           {"taxonomy", v.taxonomy},
           {"created_at", v.created_at},
           {"meta", v.meta}};
}

void from_json(const json& j, ImagePair& v) {
  j.at("id").get_to(v.id);
  j.at("source_uri").get_to(v.source_uri);
  j.at("target_uri").get_to(v.target_uri);
  j.at("source_object").get_to(v.source_object);
  j.at("target_object").get_to(v.target_object);
  j.at("taxonomy").get_to(v.taxonomy);
  j.at("created_at").get_to(v.created_at);
  v.meta = j.value("meta", std::map<std::string, std::string>{});
}

void to_json(json& j, const Producer& v) {
  j = json{{"kind", v.kind == ProducerKind::kModel ? "model" : "human"}, {"id", v.id}};
}

void from_json(const json& j, Producer& v) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind != "model" && kind != "human") raise(ErrorCode::kInvalidArgument, "unknown producer kind " + kind);
  v.kind = kind == "model" ? ProducerKind::kModel : ProducerKind::kHuman;
  j.at("id").get_to(v.id);
}

void to_json(json& j, const Instruction& v) {
  j = json{{"text", v.text}, {"producer", v.producer}, {"created_at", v.created_at}};
}

void from_json(const json& j, Instruction& v) {
  j.at("text").get_to(v.text);
  j.at("producer").get_to(v.producer);
  v.created_at = j.value("created_at", "");
}

void to_json(json& j, const EditScoreResult& v) {
  j = json{{"editing_success", v.editing_success},
           {"overedit_degree", v.overedit_degree},
           {"aggregate", v.aggregate},
           {"scorer_id", v.scorer_id}};
}

void from_json(const json& j, EditScoreResult& v) {
  j.at("editing_success").get_to(v.editing_success);
  j.at("overedit_degree").get_to(v.overedit_degree);
  j.at("aggregate").get_to(v.aggregate);
  j.at("scorer_id").get_to(v.scorer_id);
}

void to_json(json& j, const TripletRecord& v) {
  j = json{{"pair_id", v.pair_id}, {"draft", v.draft}, {"status", to_string(v.status)}};
  j["refined"] = v.refined ? json(*v.refined) : json(nullptr);
  j["filter_result"] = v.filter_result ? json(*v.filter_result) : json(nullptr);
}

void from_json(const json& j, TripletRecord& v) {
  j.at("pair_id").get_to(v.pair_id);
  j.at("draft").get_to(v.draft);
  auto status = parse_status(j.at("status").get<std::string>());
  if (!status) raise(ErrorCode::kInvalidArgument, "unknown triplet status");
  v.status = *status;
  v.refined.reset();
  v.filter_result.reset();
  if (j.contains("refined") && !j["refined"].is_null()) v.refined = j["refined"].get<Instruction>();
  if (j.contains("filter_result") && !j["filter_result"].is_null()) {
    v.filter_result = j["filter_result"].get<EditScoreResult>();
  }
}

void to_json(json& j, const GroundTruth& v) {
  j = json{{"pair_id", v.pair_id},
           {"primary_changes", v.primary_changes},
           {"secondary_changes", v.secondary_changes},
           {"overall_description", v.overall_description}};
}

void from_json(const json& j, GroundTruth& v) {
  j.at("pair_id").get_to(v.pair_id);
  j.at("primary_changes").get_to(v.primary_changes);
  v.secondary_changes = j.value("secondary_changes", std::vector<std::string>{});
  v.overall_description = j.value("overall_description", "");
}

}  // namespace editfactory::corpus
