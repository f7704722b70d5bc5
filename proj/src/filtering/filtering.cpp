#include "editfactory/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/assets.hpp"
#include "core/json_scan.hpp"
#include "core/pair_images.hpp"

namespace editfactory::filtering {

using nlohmann::json;

double Combiner::combine(double success, double overedit) const {
  switch (kind) {
    case Kind::kProduct: return success * (1.0 - overedit);
    case Kind::kWeighted: return success_weight * success + (1.0 - success_weight) * (1.0 - overedit);
  }
  return 0;
}

std::string Combiner::name() const {
  if (kind == Kind::kProduct) return "product";
  std::ostringstream ss;
  ss << "weighted:" << success_weight;
  return ss.str();
}

Combiner Combiner::parse(const std::string& spec) {
  if (spec.empty() || spec == "product") return {};
  if (spec.rfind("weighted:", 0) == 0) {
    Combiner c{Kind::kWeighted};
    try {
      c.success_weight = std::stod(spec.substr(9));
    } catch (const std::exception&) {
      raise(ErrorCode::kInvalidArgument, "bad combiner weight in '" + spec + "'");
    }
    if (!(c.success_weight >= 0 && c.success_weight <= 1)) raise(ErrorCode::kInvalidArgument, "combiner weight must lie in [0,1]");
    return c;
  }
  raise(ErrorCode::kInvalidArgument, "unknown combiner '" + spec + "'");
}

EditScoreResult make_score(double success, double overedit, double scale, const std::string& scorer_model,
                           const Combiner& combiner) {
  if (!(scale > 0) || !std::isfinite(scale)) raise(ErrorCode::kUnparseable, "scorer scale must be positive");
  if (!std::isfinite(success) || !std::isfinite(overedit)) raise(ErrorCode::kUnparseable, "non-finite scorer facet");
  if (success < 0 || success > scale || overedit < 0 || overedit > scale) {
    raise(ErrorCode::kUnparseable, "scorer facet outside [0, scale]");
  }
  EditScoreResult r;
  r.editing_success = success / scale;
  r.overedit_degree = overedit / scale;
  r.aggregate = combiner.combine(r.editing_success, r.overedit_degree);
  std::ostringstream id;
  id << scorer_model << ";scale=" << scale << ";combiner=" << combiner.name();
  r.scorer_id = id.str();
  return r;
}

EditScoreResult parse_score_response(std::string_view text, const std::string& scorer_model, const Combiner& combiner) {
  auto obj = detail::last_json_object(text);
  if (!obj || !obj->value.contains("editing_success") || !obj->value.contains("overedit_degree")) {
    raise(ErrorCode::kUnparseable, "scorer response has no score object: " + std::string(text.substr(0, 200)));
  }
  const auto& j = obj->value;
  try {
    return make_score(j.at("editing_success").get<double>(), j.at("overedit_degree").get<double>(),
                      j.value("scale", 1.0), scorer_model, combiner);
  } catch (const json::exception& e) {
    raise(ErrorCode::kUnparseable, std::string("scorer response: ") + e.what());
  }
}

providers::ChatRequest build_score_request(const corpus::Store& store, const corpus::ImagePair& pair,
                                           const corpus::Instruction& instruction) {
  providers::ChatRequest req;
  req.images = detail::pair_images(store, pair);
  std::string prompt(assets::editscore_prompt_v1);
  const std::string placeholder = "{instruction}";
  prompt.replace(prompt.find(placeholder), placeholder.size(), instruction.text);
  req.prompt = std::move(prompt);
  req.temperature = 0.0;
  req.seed = 0;
  req.tag = "score:" + pair.id;
  return req;
}

EditScoreResult score(corpus::Store& store, const corpus::ImagePair& pair, const corpus::Instruction& instruction,
                      const providers::Client& scorer, const Combiner& combiner) {
  const auto completion = scorer.complete(build_score_request(store, pair, instruction));
  auto result = parse_score_response(completion.text, scorer.config().model_id, combiner);
  if (store.triplet(pair.id)) store.record_score(pair.id, result);
  return result;
}

ScoreBatchReport score_pending(corpus::Store& store, const providers::Client& scorer, const Combiner& combiner) {
  std::vector<corpus::TripletRecord> todo;
  for (auto& t : store.triplets()) {
    if (t.status == corpus::TripletStatus::kDrafted && !t.filter_result) todo.push_back(std::move(t));
  }
  std::vector<providers::ChatRequest> reqs;
  reqs.reserve(todo.size());
  for (const auto& t : todo) {
    auto pair = store.pair(t.pair_id);
    if (!pair) raise(ErrorCode::kNotFound, "triplet without pair " + t.pair_id);
    reqs.push_back(build_score_request(store, *pair, t.draft));
  }
  ScoreBatchReport report;
  const auto results = scorer.batch_complete(reqs);
  for (const auto& item : results) {
    const auto& id = todo[item.index].pair_id;
    if (!item.ok()) {
      report.failed.emplace_back(id, item.error().message);
      continue;
    }
    try {
      store.record_score(id, parse_score_response(item.completion().text, scorer.config().model_id, combiner));
      ++report.scored;
    } catch (const Error& e) {
      report.failed.emplace_back(id, e.what());
    }
  }
  return report;
}

namespace {

template <typename Keep>
PartitionResult partition_impl(std::span<const TripletRecord> records, Keep keep, std::string rule) {
  PartitionResult out;
  out.rule = std::move(rule);
  for (const auto& r : records) {
    if (!r.filter_result) raise(ErrorCode::kMissingScore, "record " + r.pair_id + " has no EditScore result");
  }
  for (const auto& r : records) (keep(*r.filter_result) ? out.kept : out.discarded).push_back(r);
  out.retention = records.empty() ? 0.0 : static_cast<double>(out.kept.size()) / static_cast<double>(records.size());
  return out;
}

}  // namespace

PartitionResult partition(std::span<const TripletRecord> records, double threshold) {
  std::ostringstream rule;
  rule << "aggregate >= " << threshold;
  return partition_impl(records, [&](const EditScoreResult& s) { return s.aggregate >= threshold; }, rule.str());
}

PartitionResult partition_by_facets(std::span<const TripletRecord> records, const FacetThresholds& facets) {
  std::ostringstream rule;
  rule << "editing_success >= " << facets.min_success << " and overedit_degree <= " << facets.max_overedit;
  return partition_impl(
      records,
      [&](const EditScoreResult& s) {
        return s.editing_success >= facets.min_success && s.overedit_degree <= facets.max_overedit;
      },
      rule.str());
}

double threshold_for_retention(std::span<const TripletRecord> records, double target_retention) {
  if (!(target_retention >= 0 && target_retention <= 1)) raise(ErrorCode::kInvalidArgument, "target retention must lie in [0,1]");
  if (records.empty()) raise(ErrorCode::kEmptyDataset, "no records to calibrate a threshold on");
  std::vector<double> agg;
  for (const auto& r : records) {
    if (!r.filter_result) raise(ErrorCode::kMissingScore, "record " + r.pair_id + " has no EditScore result");
    agg.push_back(r.filter_result->aggregate);
  }
  std::sort(agg.begin(), agg.end(), std::greater<>());
  const auto k = static_cast<std::size_t>(std::llround(target_retention * static_cast<double>(agg.size())));
  if (k == 0) return std::nextafter(agg.front(), std::numeric_limits<double>::infinity());
  return agg[std::min(k, agg.size()) - 1];
}

void apply_partition(corpus::Store& store, const PartitionResult& result) {
  for (const auto& r : result.kept) store.set_status(r.pair_id, corpus::TripletStatus::kFiltered);
  for (const auto& r : result.discarded) store.set_status(r.pair_id, corpus::TripletStatus::kRejected);
}

json retention_report_json(const PartitionResult& result) {
  const std::size_t total = result.kept.size() + result.discarded.size();
  json j = {{"rule", result.rule},
            {"total", total},
            {"kept", result.kept.size()},
            {"discarded", result.discarded.size()},
            {"retention", result.retention}};
  j["discarded_ids"] = json::array();
  for (const auto& r : result.discarded) j["discarded_ids"].push_back(r.pair_id);
  return j;
}

std::string retention_report_markdown(const PartitionResult& result) {
  const std::size_t total = result.kept.size() + result.discarded.size();
  char retention[32];
  std::snprintf(retention, sizeof retention, "%.4f", result.retention);
  std::ostringstream md;
  md << "# EditScore filter\n\n"
     << "Rule: `" << result.rule << "`\n\n"
     << "| Total | Kept | Discarded | Retention |\n"
     << "|---:|---:|---:|---:|\n"
     << "| " << total << " | " << result.kept.size() << " | " << result.discarded.size() << " | " << retention
     << " |\n";
  return md.str();
}

}  // namespace editfactory::filtering
