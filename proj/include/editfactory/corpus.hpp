#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "editfactory/error.hpp"
#include "editfactory/records.hpp"
#include "editfactory/store.hpp"

namespace editfactory::corpus {

// Deterministic id of a pair: sha256 over length-prefixed source and target bytes.
std::string pair_id_for(std::span<const std::uint8_t> source, std::span<const std::uint8_t> target);

struct RejectedLine {
  std::size_t line = 0;  // 1-based
  ErrorCode code = ErrorCode::kOk;
  std::string reason;
};

struct IngestReport {
  std::size_t accepted = 0;
  std::size_t duplicates = 0;
  std::vector<RejectedLine> rejected;
};

void to_json(nlohmann::json& j, const IngestReport& r);

// Reads a JSONL manifest. Relative URIs resolve against the manifest's
// directory; http(s) URIs are fetched. Bad lines are reported, never fatal.
IngestReport ingest_pairs(Store& store, const std::filesystem::path& manifest);

// Fetches the bytes behind a manifest locator.
Bytes fetch_uri(const std::string& uri, const std::filesystem::path& base_dir);

// Per-category quotas by largest remainder; ties go to the earlier category in
// Semantic, Stylistic, Structural order. Fractions must sum to 1 +- 1e-9.
std::map<Category, std::size_t> category_quotas(std::size_t n, const std::map<Category, double>& targets);

struct SampleOptions {
  std::uint64_t seed = 0;
  // When a category is short, fill from the categories with spare pairs
  // instead of raising kInsufficientPairs.
  bool allow_substitution = false;
};

std::vector<ImagePair> sample_balanced(const Store& store, std::size_t n,
                                       const std::map<Category, double>& targets,
                                       const SampleOptions& options = {});

}  // namespace editfactory::corpus
