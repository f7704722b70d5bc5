#include "editfactory/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "core/http_client.hpp"
#include "editfactory/image_probe.hpp"

namespace editfactory::corpus {

using nlohmann::json;

namespace {

void append_length_prefixed(Bytes& out, std::span<const std::uint8_t> data) {
  std::uint64_t n = data.size();
  for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(n >> (8 * i)));
  out.insert(out.end(), data.begin(), data.end());
}

bool is_http(const std::string& uri) { return uri.rfind("http://", 0) == 0 || uri.rfind("https://", 0) == 0; }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

std::string pair_id_for(std::span<const std::uint8_t> source, std::span<const std::uint8_t> target) {
  Bytes buf;
  buf.reserve(source.size() + target.size() + 16);
  append_length_prefixed(buf, source);
  append_length_prefixed(buf, target);
  return sha256_hex(buf);
}

void to_json(json& j, const IngestReport& r) {
  j = json{{"accepted", r.accepted}, {"duplicates", r.duplicates}, {"rejected", json::array()}};
  for (const auto& rej : r.rejected) {
    j["rejected"].push_back({{"line", rej.line}, {"error", error_code_name(rej.code)}, {"reason", rej.reason}});
  }
}

Bytes fetch_uri(const std::string& uri, const std::filesystem::path& base_dir) {
  if (is_http(uri)) {
    auto res = detail::http_request("GET", uri, {}, "", "", std::chrono::seconds(30));
    if (!res.transport_ok) raise(ErrorCode::kIo, "fetch " + uri + ": " + res.error);
    if (res.status != 200) raise(ErrorCode::kIo, "fetch " + uri + ": HTTP " + std::to_string(res.status));
    return Bytes(res.body.begin(), res.body.end());
  }
  std::filesystem::path p = uri.rfind("file://", 0) == 0 ? std::filesystem::path(uri.substr(7)) : std::filesystem::path(uri);
  if (p.is_relative()) p = base_dir / p;
  return read_file_bytes(p);
}

IngestReport ingest_pairs(Store& store, const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) raise(ErrorCode::kNotFound, "manifest not found: " + manifest.string());
  const auto base_dir = manifest.parent_path();

  IngestReport report;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto reject = [&](ErrorCode code, std::string reason) {
      report.rejected.push_back({lineno, code, std::move(reason)});
    };
    try {
      const json row = json::parse(line);
      const auto source_uri = row.at("source_uri").get<std::string>();
      const auto target_uri = row.at("target_uri").get<std::string>();
      const TaxonomyLabel label =
          make_label(row.at("category").get<std::string>(), row.at("subtype").get<std::string>());
      if (source_uri == target_uri) {
        reject(ErrorCode::kIdenticalImages, "source_uri and target_uri are the same locator");
        continue;
      }

      Bytes source, target;
      try {
        source = fetch_uri(source_uri, base_dir);
        target = fetch_uri(target_uri, base_dir);
      } catch (const Error& e) {
        reject(ErrorCode::kUndecodableImage, e.what());
        continue;
      }
      if (!probe_image(source)) {
        reject(ErrorCode::kUndecodableImage, "source image is not decodable: " + source_uri);
        continue;
      }
      if (!probe_image(target)) {
        reject(ErrorCode::kUndecodableImage, "target image is not decodable: " + target_uri);
        continue;
      }
      if (source == target) {
        reject(ErrorCode::kIdenticalImages, "source and target bytes are identical");
        continue;
      }

      const auto id = pair_id_for(source, target);
      if (store.has_pair(id)) {
        ++report.duplicates;
        continue;
      }
      ImagePair pair;
      pair.id = id;
      pair.source_uri = source_uri;
      pair.target_uri = target_uri;
      pair.source_object = store.put_object(source);
      pair.target_object = store.put_object(target);
      pair.taxonomy = label;
      pair.created_at = store.now();
      if (row.contains("meta") && row["meta"].is_object()) {
        for (auto& [k, v] : row["meta"].items()) pair.meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
      }
      store.add_pair(pair);
      ++report.accepted;
    } catch (const Error& e) {
      reject(e.code(), e.what());
    } catch (const json::exception& e) {
      reject(ErrorCode::kInvalidArgument, e.what());
    }
  }
  return report;
}

std::map<Category, std::size_t> category_quotas(std::size_t n, const std::map<Category, double>& targets) {
  double sum = 0;
  for (auto [c, f] : targets) {
    if (!(f >= 0.0) || !std::isfinite(f)) raise(ErrorCode::kInvalidArgument, "fractions must be finite and >= 0");
    sum += f;
  }
  if (std::fabs(sum - 1.0) > 1e-9) raise(ErrorCode::kInvalidArgument, "fractions must sum to 1");

  struct Share {
    Category category;
    std::size_t floor;
    double remainder;
  };
  std::vector<Share> shares;
  std::size_t assigned = 0;
  for (Category c : kAllCategories) {
    auto it = targets.find(c);
    const double exact = it == targets.end() ? 0.0 : static_cast<double>(n) * it->second;
    // Snap values a hair below an integer (e.g. 24.999999999) before flooring.
    const double fl = std::floor(exact + 1e-9);
    shares.push_back({c, static_cast<std::size_t>(fl), std::max(0.0, exact - fl)});
    assigned += static_cast<std::size_t>(fl);
  }
  std::vector<Share> order = shares;
  std::stable_sort(order.begin(), order.end(),
                   [](const Share& a, const Share& b) { return a.remainder > b.remainder + 1e-12; });
  std::map<Category, std::size_t> quotas;
  for (const auto& s : shares) quotas[s.category] = s.floor;
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) quotas[order[i % order.size()].category] += 1;
  return quotas;
}

std::vector<ImagePair> sample_balanced(const Store& store, std::size_t n, const std::map<Category, double>& targets,
                                       const SampleOptions& options) {
  auto quotas = category_quotas(n, targets);
  auto all = store.pairs();
  if (all.empty()) raise(ErrorCode::kInsufficientPairs, "corpus is empty");

  std::map<Category, std::vector<ImagePair>> pools;
  for (auto& p : all) pools[p.taxonomy.category].push_back(std::move(p));
  for (auto& [c, pool] : pools) {
    std::sort(pool.begin(), pool.end(), [&](const ImagePair& a, const ImagePair& b) {
      const auto ka = splitmix64(options.seed ^ fnv1a(a.id));
      const auto kb = splitmix64(options.seed ^ fnv1a(b.id));
      return ka != kb ? ka < kb : a.id < b.id;
    });
  }

  std::size_t shortfall = 0;
  for (Category c : kAllCategories) {
    const std::size_t have = pools[c].size();
    if (quotas[c] > have) {
      if (!options.allow_substitution) {
        raise(ErrorCode::kInsufficientPairs, "category " + std::string(to_string(c)) + " has " +
                                                 std::to_string(have) + " pairs, quota " + std::to_string(quotas[c]));
      }
      shortfall += quotas[c] - have;
      quotas[c] = have;
    }
  }
  for (Category c : kAllCategories) {
    const std::size_t spare = pools[c].size() - quotas[c];
    const std::size_t take = std::min(spare, shortfall);
    quotas[c] += take;
    shortfall -= take;
  }
  if (shortfall > 0) raise(ErrorCode::kInsufficientPairs, "corpus holds fewer than " + std::to_string(n) + " pairs");

  std::vector<ImagePair> out;
  out.reserve(n);
  for (Category c : kAllCategories) {
    auto& pool = pools[c];
    out.insert(out.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(quotas[c]));
  }
  return out;
}

}  // namespace editfactory::corpus
