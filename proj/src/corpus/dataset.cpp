#include "editfactory/dataset.hpp"

#include <algorithm>
#include <fstream>

#include "editfactory/error.hpp"

namespace editfactory::corpus {

using nlohmann::json;

void to_json(json& j, const DatasetRow& r) {
  j = json{{"pair_id", r.pair_id}, {"model", r.model}, {"instruction", r.instruction}};
}

void from_json(const json& j, DatasetRow& r) {
  j.at("pair_id").get_to(r.pair_id);
  j.at("model").get_to(r.model);
  j.at("instruction").get_to(r.instruction);
}

void put_dataset_rows(Store& store, const std::string& name, std::span<const DatasetRow> rows) {
  if (name.empty()) raise(ErrorCode::kInvalidArgument, "dataset name is empty");
  for (const auto& r : rows) {
    if (trim(r.instruction).empty()) raise(ErrorCode::kInvalidArgument, "dataset row with empty instruction");
    store.put("dataset:" + name, r.model + "|" + r.pair_id, r);
  }
}

std::vector<DatasetRow> load_dataset(const Store& store, const std::string& name) {
  std::vector<DatasetRow> rows;
  for (auto& [key, j] : store.list("dataset:" + name)) rows.push_back(j.get<DatasetRow>());
  if (rows.empty()) {
    if (!std::filesystem::is_regular_file(name)) raise(ErrorCode::kNotFound, "unknown dataset '" + name + "'");
    rows = read_dataset_jsonl(name);
  }
  std::sort(rows.begin(), rows.end(), [](const DatasetRow& a, const DatasetRow& b) {
    return std::tie(a.model, a.pair_id) < std::tie(b.model, b.pair_id);
  });
  return rows;
}

namespace {

template <typename Fn>
void for_each_jsonl(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::kNotFound, "cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      raise(ErrorCode::kInvalidArgument, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace

std::vector<DatasetRow> read_dataset_jsonl(const std::filesystem::path& path) {
  std::vector<DatasetRow> rows;
  for_each_jsonl(path, [&](const json& j) { rows.push_back(j.get<DatasetRow>()); });
  return rows;
}

std::size_t load_ground_truth(Store& store, const std::filesystem::path& path) {
  std::vector<GroundTruth> records;
  for_each_jsonl(path, [&](const json& j) { records.push_back(j.get<GroundTruth>()); });
  for (const auto& gt : records) store.put_ground_truth(gt);
  return records.size();
}

}  // namespace editfactory::corpus
