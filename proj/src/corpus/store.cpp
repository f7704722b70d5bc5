#include "editfactory/store.hpp"

#include <fstream>
#include <mutex>

#include "editfactory/error.hpp"

namespace editfactory::corpus {

using nlohmann::json;

namespace {
constexpr const char* kPairs = "pairs";
constexpr const char* kTriplets = "triplets";
constexpr const char* kModelOutputs = "model_outputs";
constexpr const char* kGroundTruth = "ground_truth";
}  // namespace

Store::Store(std::filesystem::path data_dir, Clock clock)
    : data_dir_(std::move(data_dir)), log_path_(data_dir_ / "events.jsonl"), clock_(std::move(clock)) {
  std::filesystem::create_directories(data_dir_ / "objects");
  replay();
}

void Store::replay() {
  std::ifstream in(log_path_);
  if (!in) return;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json ev;
    try {
      ev = json::parse(line);
    } catch (const json::parse_error&) {
      // A torn final line from a crash mid-append is dropped; anything earlier is corruption.
      if (in.peek() == std::char_traits<char>::eof()) break;
      raise(ErrorCode::kIo, log_path_.string() + ":" + std::to_string(lineno) + ": corrupt event");
    }
    index_[ev.at("collection").get<std::string>()][ev.at("key").get<std::string>()] = ev.at("data");
    next_seq_ = ev.at("seq").get<std::int64_t>() + 1;
    events_.push_back(std::move(ev));
  }
}

void Store::append_locked(const std::string& collection, const std::string& key, const json& data) {
  json ev = {{"seq", next_seq_}, {"ts", clock_()}, {"collection", collection}, {"key", key}, {"data", data}};
  std::ofstream out(log_path_, std::ios::app | std::ios::binary);
  if (!out) raise(ErrorCode::kIo, "cannot append to " + log_path_.string());
  out << ev.dump() << '\n';
  out.flush();
  if (!out) raise(ErrorCode::kIo, "short write to " + log_path_.string());
  ++next_seq_;
  index_[collection][key] = data;
  events_.push_back(std::move(ev));
}

void Store::put(const std::string& collection, const std::string& key, const json& data) {
  std::unique_lock lock(mu_);
  append_locked(collection, key, data);
}

std::optional<json> Store::get(const std::string& collection, const std::string& key) const {
  std::shared_lock lock(mu_);
  auto c = index_.find(collection);
  if (c == index_.end()) return std::nullopt;
  auto it = c->second.find(key);
  if (it == c->second.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<std::string, json>> Store::list(const std::string& collection) const {
  std::shared_lock lock(mu_);
  std::vector<std::pair<std::string, json>> out;
  if (auto c = index_.find(collection); c != index_.end()) {
    out.assign(c->second.begin(), c->second.end());
  }
  return out;
}

std::vector<json> Store::events() const {
  std::shared_lock lock(mu_);
  return events_;
}

std::string Store::put_object(std::span<const std::uint8_t> bytes) {
  const std::string hash = sha256_hex(bytes);
  const auto path = object_path(hash);
  if (!std::filesystem::exists(path)) {
    write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  }
  return hash;
}

std::filesystem::path Store::object_path(const std::string& hash) const {
  if (hash.size() < 3) raise(ErrorCode::kInvalidArgument, "bad object hash");
  return data_dir_ / "objects" / hash.substr(0, 2) / hash;
}

std::optional<Bytes> Store::read_object(const std::string& hash) const {
  const auto path = object_path(hash);
  if (!std::filesystem::exists(path)) return std::nullopt;
  return read_file_bytes(path);
}

bool Store::has_pair(const std::string& id) const { return get(kPairs, id).has_value(); }

std::optional<ImagePair> Store::pair(const std::string& id) const {
  auto j = get(kPairs, id);
  if (!j) return std::nullopt;
  return j->get<ImagePair>();
}

std::vector<ImagePair> Store::pairs() const {
  std::vector<ImagePair> out;
  for (auto& [key, j] : list(kPairs)) out.push_back(j.get<ImagePair>());
  return out;
}

void Store::add_pair(const ImagePair& pair) {
  if (pair.source_uri == pair.target_uri) raise(ErrorCode::kIdenticalImages, "source_uri equals target_uri");
  put(kPairs, pair.id, pair);
}

TripletRecord Store::triplet_locked(const std::string& pair_id) const {
  auto c = index_.find(kTriplets);
  if (c == index_.end() || !c->second.count(pair_id)) raise(ErrorCode::kNotFound, "no triplet for pair " + pair_id);
  return c->second.at(pair_id).get<TripletRecord>();
}

void Store::create_triplet(const std::string& pair_id, const Instruction& draft) {
  if (draft.producer.kind != ProducerKind::kModel) raise(ErrorCode::kInvalidArgument, "draft must be model-produced");
  std::unique_lock lock(mu_);
  if (!index_[kPairs].count(pair_id)) raise(ErrorCode::kNotFound, "unknown pair " + pair_id);
  if (index_[kTriplets].count(pair_id)) raise(ErrorCode::kInvalidArgument, "triplet already exists for " + pair_id);
  TripletRecord rec;
  rec.pair_id = pair_id;
  rec.draft = draft;
  append_locked(kTriplets, pair_id, rec);
  auto outputs = index_[kModelOutputs].count(pair_id) ? index_[kModelOutputs][pair_id] : json::array();
  outputs.push_back(draft);
  append_locked(kModelOutputs, pair_id, outputs);
}

std::optional<TripletRecord> Store::triplet(const std::string& pair_id) const {
  auto j = get(kTriplets, pair_id);
  if (!j) return std::nullopt;
  return j->get<TripletRecord>();
}

std::vector<TripletRecord> Store::triplets() const {
  std::vector<TripletRecord> out;
  for (auto& [key, j] : list(kTriplets)) out.push_back(j.get<TripletRecord>());
  return out;
}

void Store::record_score(const std::string& pair_id, const EditScoreResult& score) {
  std::unique_lock lock(mu_);
  auto rec = triplet_locked(pair_id);
  rec.filter_result = score;
  append_locked(kTriplets, pair_id, rec);
}

void Store::set_status(const std::string& pair_id, TripletStatus status) {
  if (status == TripletStatus::kRefined) raise(ErrorCode::kInvalidArgument, "use set_refined to mark a record Refined");
  std::unique_lock lock(mu_);
  auto rec = triplet_locked(pair_id);
  if (rec.status == status) return;
  if (!can_transition(rec.status, status)) {
    raise(ErrorCode::kInvalidTransition, "triplet " + pair_id + ": " + std::string(to_string(rec.status)) + " -> " +
                                             std::string(to_string(status)));
  }
  rec.status = status;
  append_locked(kTriplets, pair_id, rec);
}

void Store::set_refined(const std::string& pair_id, const Instruction& refined) {
  if (refined.producer.kind != ProducerKind::kHuman) raise(ErrorCode::kInvalidArgument, "refinement must be human");
  std::unique_lock lock(mu_);
  auto rec = triplet_locked(pair_id);
  if (!can_transition(rec.status, TripletStatus::kRefined)) {
    raise(ErrorCode::kInvalidTransition,
          "triplet " + pair_id + ": " + std::string(to_string(rec.status)) + " -> Refined");
  }
  rec.refined = refined;
  rec.status = TripletStatus::kRefined;
  append_locked(kTriplets, pair_id, rec);
}

void Store::record_model_output(const std::string& pair_id, const Instruction& output) {
  if (output.producer.kind != ProducerKind::kModel) raise(ErrorCode::kInvalidArgument, "model output must be model-produced");
  std::unique_lock lock(mu_);
  if (!index_[kPairs].count(pair_id)) raise(ErrorCode::kNotFound, "unknown pair " + pair_id);
  auto outputs = index_[kModelOutputs].count(pair_id) ? index_[kModelOutputs][pair_id] : json::array();
  for (const auto& o : outputs) {
    if (o.at("text") == output.text && o.at("producer") == json(output.producer)) return;
  }
  outputs.push_back(output);
  append_locked(kModelOutputs, pair_id, outputs);
}

std::vector<Instruction> Store::model_outputs(const std::string& pair_id) const {
  auto j = get(kModelOutputs, pair_id);
  if (!j) return {};
  return j->get<std::vector<Instruction>>();
}

void Store::put_ground_truth(const GroundTruth& gt) {
  validate(gt);
  put(kGroundTruth, gt.pair_id, gt);
}

std::optional<GroundTruth> Store::ground_truth(const std::string& pair_id) const {
  auto j = get(kGroundTruth, pair_id);
  if (!j) return std::nullopt;
  return j->get<GroundTruth>();
}

}  // namespace editfactory::corpus
