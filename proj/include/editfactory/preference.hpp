#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "editfactory/records.hpp"
#include "editfactory/store.hpp"

namespace editfactory::preference {

enum class FailureMode { kOrientationInconsistency, kViewpointAmbiguity, kLackOfDetail };

// "orientation_inconsistency", "viewpoint_ambiguity", "lack_of_detail".
std::string_view to_string(FailureMode m);
std::optional<FailureMode> parse_failure_mode(std::string_view s);

struct PreferencePair {
  std::string pair_id;
  corpus::Instruction chosen;    // human
  corpus::Instruction rejected;  // model
  std::vector<FailureMode> failure_modes;  // sorted, unique
  std::string annotator_id;
  std::string note;
};

void to_json(nlohmann::json& j, const PreferencePair& p);
void from_json(const nlohmann::json& j, PreferencePair& p);

// Checks provenance (rejected text must be a stored model output for the
// pair) and persists the pair. Throws kNotFound, kIdenticalTexts,
// kUnknownDraft, kEmptyModes.
PreferencePair build_pair(corpus::Store& store, const std::string& pair_id, const std::string& rejected_text,
                          const std::string& chosen_text, std::vector<FailureMode> modes,
                          const std::string& annotator_id, const std::string& note = {});

// Stored pairs ordered by (pair_id, rejected text).
std::vector<PreferencePair> preference_pairs(const corpus::Store& store);

// Per-token mean negative log-likelihood (or the sum when `sum` is set).
// Throws kEmptySequence, kInvalidLogProb for a positive or non-finite value.
double sft_loss(std::span<const double> log_probs, bool sum = false);

// softplus(-margin) = -log sigmoid(margin), stable for any finite margin.
double dpo_loss_from_margin(double beta, double margin);
// d loss / d margin = -beta * sigmoid(-beta * margin).
double dpo_loss_gradient(double beta, double margin);

struct DpoOptions {
  double beta = 0;             // required, no default
  bool length_normalized = false;  // mean instead of sum per sequence
};

// -log sigmoid(beta * ((pol_w - ref_w) - (pol_l - ref_l))) with sequence
// log-probabilities formed by summing tokens. Throws kNonPositiveBeta,
// kEmptySequence, kInvalidLogProb.
double dpo_loss(std::span<const double> policy_chosen, std::span<const double> policy_rejected,
                std::span<const double> ref_chosen, std::span<const double> ref_rejected, const DpoOptions& options);

struct ExportManifest {
  std::string kind;  // "sft" or "dpo"
  std::size_t rows = 0;
  std::string sha256;
  std::filesystem::path path;
};

nlohmann::json to_json(const ExportManifest& m);

// JSONL rows {"pair_id","source_uri","target_uri","instruction"} ordered by
// pair_id, plus <out>.manifest.json. Throws kUnrefinedRecord.
ExportManifest export_sft(const corpus::Store& store, std::span<const corpus::TripletRecord> records,
                          const std::filesystem::path& out);
// Every Refined triplet in the store.
ExportManifest export_sft(const corpus::Store& store, const std::filesystem::path& out);

// Rows {"pair_id","source_uri","target_uri","chosen","rejected","failure_modes"}.
ExportManifest export_dpo(const corpus::Store& store, std::span<const PreferencePair> pairs,
                          const std::filesystem::path& out);
ExportManifest export_dpo(const corpus::Store& store, const std::filesystem::path& out);

}  // namespace editfactory::preference
