#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "editfactory/records.hpp"
#include "editfactory/util.hpp"

namespace editfactory::corpus {

/// Append-only JSONL event log with in-memory materialized indexes.
///
/// Every mutation is one line in `<data_dir>/events.jsonl`:
///   {"seq":N,"ts":"...","collection":"pairs","key":"...","data":{...}}
/// Replaying the log in order rebuilds the latest value per (collection, key).
/// Image bytes live content-addressed under `<data_dir>/objects/`.
///
/// One process owns writes; all public members are safe to call from several
/// threads of that process.
class Store {
 public:
  explicit Store(std::filesystem::path data_dir, Clock clock = system_clock_utc());

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  const std::filesystem::path& data_dir() const { return data_dir_; }
  std::string now() const { return clock_(); }

  // Generic collections. Modules above the corpus persist their own records here.
  void put(const std::string& collection, const std::string& key, const nlohmann::json& data);
  std::optional<nlohmann::json> get(const std::string& collection, const std::string& key) const;
  // Ordered by key.
  std::vector<std::pair<std::string, nlohmann::json>> list(const std::string& collection) const;
  // Full log in append order.
  std::vector<nlohmann::json> events() const;

  // Content-addressed blobs.
  std::string put_object(std::span<const std::uint8_t> bytes);
  std::filesystem::path object_path(const std::string& hash) const;
  std::optional<Bytes> read_object(const std::string& hash) const;

  // Typed corpus accessors.
  bool has_pair(const std::string& id) const;
  std::optional<ImagePair> pair(const std::string& id) const;
  std::vector<ImagePair> pairs() const;
  void add_pair(const ImagePair& pair);

  // Creates the triplet in Drafted state and records the draft as a model output.
  void create_triplet(const std::string& pair_id, const Instruction& draft);
  std::optional<TripletRecord> triplet(const std::string& pair_id) const;
  std::vector<TripletRecord> triplets() const;
  void record_score(const std::string& pair_id, const EditScoreResult& score);
  // Throws kInvalidTransition for a backward move.
  void set_status(const std::string& pair_id, TripletStatus status);
  void set_refined(const std::string& pair_id, const Instruction& refined);

  // Every model-produced instruction seen for a pair (draft and later outputs).
  void record_model_output(const std::string& pair_id, const Instruction& output);
  std::vector<Instruction> model_outputs(const std::string& pair_id) const;

  void put_ground_truth(const GroundTruth& gt);
  std::optional<GroundTruth> ground_truth(const std::string& pair_id) const;

 private:
  void append_locked(const std::string& collection, const std::string& key, const nlohmann::json& data);
  void replay();
  TripletRecord triplet_locked(const std::string& pair_id) const;

  std::filesystem::path data_dir_;
  std::filesystem::path log_path_;
  Clock clock_;
  mutable std::shared_mutex mu_;
  std::int64_t next_seq_ = 1;
  std::vector<nlohmann::json> events_;
  std::map<std::string, std::map<std::string, nlohmann::json>> index_;
};

}  // namespace editfactory::corpus
