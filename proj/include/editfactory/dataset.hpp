#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "editfactory/store.hpp"

namespace editfactory::corpus {

// One instruction under evaluation: which pair, which model produced it.
struct DatasetRow {
  std::string pair_id;
  std::string model;
  std::string instruction;
  friend bool operator==(const DatasetRow&, const DatasetRow&) = default;
};

void to_json(nlohmann::json& j, const DatasetRow& r);
void from_json(const nlohmann::json& j, DatasetRow& r);

// Rows live in the event log under collection "dataset:<name>", keyed by
// (pair_id, model). A row for an existing key replaces it.
void put_dataset_rows(Store& store, const std::string& name, std::span<const DatasetRow> rows);

// Looks up a stored dataset first; otherwise treats `name` as a JSONL path.
// Rows come back ordered by (model, pair_id). Throws kNotFound.
std::vector<DatasetRow> load_dataset(const Store& store, const std::string& name);

// Reads {"pair_id","model","instruction"} lines. Throws kNotFound, kInvalidArgument.
std::vector<DatasetRow> read_dataset_jsonl(const std::filesystem::path& path);

// Reads {"pair_id","primary_changes","secondary_changes","overall_description"}
// lines into the store. Returns the number of records written.
std::size_t load_ground_truth(Store& store, const std::filesystem::path& path);

}  // namespace editfactory::corpus
