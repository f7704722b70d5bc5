#include "editfactory/preference.hpp"

#include <algorithm>
#include <cmath>

#include "editfactory/error.hpp"
#include "editfactory/util.hpp"

namespace editfactory::preference {

using nlohmann::json;

namespace {

constexpr const char* kPreferences = "preferences";

void check_log_probs(std::span<const double> lp) {
  if (lp.empty()) raise(ErrorCode::kEmptySequence, "log-probability sequence is empty");
  for (double v : lp) {
    if (!std::isfinite(v) || v > 0.0) raise(ErrorCode::kInvalidLogProb, "log-probabilities must be finite and <= 0");
  }
}

double sequence_logp(std::span<const double> lp, bool mean) {
  double s = 0;
  for (double v : lp) s += v;
  return mean ? s / static_cast<double>(lp.size()) : s;
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) raise(ErrorCode::kNonPositiveBeta, "beta must be a positive finite number");
}

ExportManifest write_export(const std::string& kind, const std::string& body, std::size_t rows,
                            const std::filesystem::path& out) {
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  write_file_atomic(out, body);
  ExportManifest m{kind, rows, sha256_hex(std::string_view(body)), out};
  std::filesystem::path manifest = out;
  manifest += ".manifest.json";
  write_file_atomic(manifest, to_json(m).dump(2) + "\n");
  return m;
}

}  // namespace

std::string_view to_string(FailureMode m) {
  switch (m) {
    case FailureMode::kOrientationInconsistency: return "orientation_inconsistency";
    case FailureMode::kViewpointAmbiguity: return "viewpoint_ambiguity";
    case FailureMode::kLackOfDetail: return "lack_of_detail";
  }
  return "unknown";
}

std::optional<FailureMode> parse_failure_mode(std::string_view s) {
  for (FailureMode m :
       {FailureMode::kOrientationInconsistency, FailureMode::kViewpointAmbiguity, FailureMode::kLackOfDetail}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

void to_json(json& j, const PreferencePair& p) {
  json modes = json::array();
  for (FailureMode m : p.failure_modes) modes.push_back(to_string(m));
  j = json{{"pair_id", p.pair_id},     {"chosen", p.chosen},           {"rejected", p.rejected},
           {"failure_modes", modes},   {"annotator_id", p.annotator_id}, {"note", p.note}};
}

void from_json(const json& j, PreferencePair& p) {
  p.pair_id = j.at("pair_id").get<std::string>();
  p.chosen = j.at("chosen").get<corpus::Instruction>();
  p.rejected = j.at("rejected").get<corpus::Instruction>();
  p.failure_modes.clear();
  for (const json& m : j.at("failure_modes")) {
    const auto mode = parse_failure_mode(m.get<std::string>());
    if (!mode) raise(ErrorCode::kInvalidArgument, "unknown failure mode " + m.dump());
    p.failure_modes.push_back(*mode);
  }
  p.annotator_id = j.value("annotator_id", "");
  p.note = j.value("note", "");
}

PreferencePair build_pair(corpus::Store& store, const std::string& pair_id, const std::string& rejected_text,
                          const std::string& chosen_text, std::vector<FailureMode> modes,
                          const std::string& annotator_id, const std::string& note) {
  if (!store.has_pair(pair_id)) raise(ErrorCode::kNotFound, "unknown pair " + pair_id);
  if (modes.empty()) raise(ErrorCode::kEmptyModes, "at least one failure mode is required");
  const std::string rejected_norm = normalize_whitespace(rejected_text);
  if (normalize_whitespace(chosen_text) == rejected_norm) {
    raise(ErrorCode::kIdenticalTexts, "chosen and rejected instructions are identical");
  }
  std::optional<corpus::Instruction> draft;
  for (const corpus::Instruction& out : store.model_outputs(pair_id)) {
    if (normalize_whitespace(out.text) == rejected_norm) {
      draft = out;
      break;
    }
  }
  if (!draft) raise(ErrorCode::kUnknownDraft, "rejected text is not a stored model output for pair " + pair_id);

  std::sort(modes.begin(), modes.end());
  modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
  PreferencePair p;
  p.pair_id = pair_id;
  p.chosen = corpus::make_instruction(chosen_text, {corpus::ProducerKind::kHuman, annotator_id}, store.now());
  p.rejected = *draft;
  p.failure_modes = std::move(modes);
  p.annotator_id = annotator_id;
  p.note = note;
  store.put(kPreferences, pair_id + "|" + sha256_hex(rejected_norm).substr(0, 16), p);
  return p;
}

std::vector<PreferencePair> preference_pairs(const corpus::Store& store) {
  std::vector<PreferencePair> out;
  for (const auto& [key, j] : store.list(kPreferences)) out.push_back(j.get<PreferencePair>());
  std::sort(out.begin(), out.end(), [](const PreferencePair& a, const PreferencePair& b) {
    return std::tie(a.pair_id, a.rejected.text) < std::tie(b.pair_id, b.rejected.text);
  });
  return out;
}

double sft_loss(std::span<const double> log_probs, bool sum) {
  check_log_probs(log_probs);
  return 0.0 - sequence_logp(log_probs, !sum);  // +0 rather than -0 for an all-zero sequence
}

double dpo_loss_from_margin(double beta, double margin) {
  check_beta(beta);
  return softplus(-beta * margin);
}

double dpo_loss_gradient(double beta, double margin) {
  check_beta(beta);
  return -beta * sigmoid(-beta * margin);
}

double dpo_loss(std::span<const double> policy_chosen, std::span<const double> policy_rejected,
                std::span<const double> ref_chosen, std::span<const double> ref_rejected, const DpoOptions& options) {
  check_beta(options.beta);
  for (auto s : {policy_chosen, policy_rejected, ref_chosen, ref_rejected}) check_log_probs(s);
  const bool mean = options.length_normalized;
  const double lw = sequence_logp(policy_chosen, mean) - sequence_logp(ref_chosen, mean);
  const double lr = sequence_logp(policy_rejected, mean) - sequence_logp(ref_rejected, mean);
  return dpo_loss_from_margin(options.beta, lw - lr);
}

json to_json(const ExportManifest& m) {
  return {{"kind", m.kind}, {"rows", m.rows}, {"sha256", m.sha256}, {"file", m.path.filename().string()}};
}

ExportManifest export_sft(const corpus::Store& store, std::span<const corpus::TripletRecord> records,
                          const std::filesystem::path& out) {
  std::vector<const corpus::TripletRecord*> sorted;
  for (const auto& r : records) {
    if (r.status != corpus::TripletStatus::kRefined || !r.refined) {
      raise(ErrorCode::kUnrefinedRecord, "triplet " + r.pair_id + " is not Refined");
    }
    sorted.push_back(&r);
  }
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->pair_id < b->pair_id; });
  std::string body;
  for (const auto* r : sorted) {
    const auto pair = store.pair(r->pair_id);
    if (!pair) raise(ErrorCode::kNotFound, "unknown pair " + r->pair_id);
    body += json{{"pair_id", r->pair_id},
                 {"source_uri", pair->source_uri},
                 {"target_uri", pair->target_uri},
                 {"instruction", r->refined->text}}
                .dump() +
            "\n";
  }
  return write_export("sft", body, sorted.size(), out);
}

ExportManifest export_sft(const corpus::Store& store, const std::filesystem::path& out) {
  std::vector<corpus::TripletRecord> refined;
  for (auto& r : store.triplets()) {
    if (r.status == corpus::TripletStatus::kRefined) refined.push_back(std::move(r));
  }
  return export_sft(store, refined, out);
}

ExportManifest export_dpo(const corpus::Store& store, std::span<const PreferencePair> pairs,
                          const std::filesystem::path& out) {
  std::vector<const PreferencePair*> sorted;
  for (const auto& p : pairs) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) {
    return std::tie(a->pair_id, a->rejected.text) < std::tie(b->pair_id, b->rejected.text);
  });
  std::string body;
  for (const auto* p : sorted) {
    const auto pair = store.pair(p->pair_id);
    if (!pair) raise(ErrorCode::kNotFound, "unknown pair " + p->pair_id);
    json modes = json::array();
    for (FailureMode m : p->failure_modes) modes.push_back(to_string(m));
    body += json{{"pair_id", p->pair_id},
                 {"source_uri", pair->source_uri},
                 {"target_uri", pair->target_uri},
                 {"chosen", p->chosen.text},
                 {"rejected", p->rejected.text},
                 {"failure_modes", modes}}
                .dump() +
            "\n";
  }
  return write_export("dpo", body, sorted.size(), out);
}

ExportManifest export_dpo(const corpus::Store& store, const std::filesystem::path& out) {
  const auto pairs = preference_pairs(store);
  return export_dpo(store, pairs, out);
}

}  // namespace editfactory::preference
