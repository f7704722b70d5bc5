#pragma once

#include <zlib.h>

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "editfactory/corpus.hpp"
#include "editfactory/providers.hpp"
#include "editfactory/store.hpp"
#include "editfactory/util.hpp"

namespace testsupport {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "editfactory-test-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline void write_text(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << s;
}

inline void write_bytes(const fs::path& p, const editfactory::Bytes& b) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Minimal valid RGB PNG; `seed` varies the pixels.
inline editfactory::Bytes make_png(std::uint32_t width, std::uint32_t height, std::uint32_t seed) {
  std::vector<std::uint8_t> raw;
  std::mt19937 rng(seed);
  for (std::uint32_t y = 0; y < height; ++y) {
    raw.push_back(0);
    for (std::uint32_t x = 0; x < width * 3; ++x) raw.push_back(static_cast<std::uint8_t>(rng()));
  }
  uLongf zlen = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> z(zlen);
  compress(z.data(), &zlen, raw.data(), static_cast<uLong>(raw.size()));
  z.resize(zlen);

  editfactory::Bytes out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  auto put32 = [&](std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
  };
  auto chunk = [&](const char* type, const std::vector<std::uint8_t>& data) {
    put32(static_cast<std::uint32_t>(data.size()));
    const std::size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    put32(static_cast<std::uint32_t>(crc32(0, out.data() + start, static_cast<uInt>(data.size() + 4))));
  };
  std::vector<std::uint8_t> ihdr;
  for (std::uint32_t v : {width, height})
    for (int s = 24; s >= 0; s -= 8) ihdr.push_back(static_cast<std::uint8_t>(v >> s));
  ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});
  chunk("IHDR", ihdr);
  chunk("IDAT", z);
  chunk("IEND", {});
  return out;
}

// In-process transport answering from a callback; counts calls.
class ScriptedTransport final : public editfactory::providers::Transport {
 public:
  using Fn = std::function<editfactory::providers::AttemptResult(const editfactory::providers::ChatRequest&, int call)>;
  explicit ScriptedTransport(Fn fn) : fn_(std::move(fn)) {}

  editfactory::providers::AttemptResult send(const editfactory::providers::ProviderConfig&,
                                             const editfactory::providers::ChatRequest& req,
                                             const std::string& key) override {
    last_key = key;
    return fn_(req, calls++);
  }

  std::atomic<int> calls{0};
  std::string last_key;

 private:
  Fn fn_;
};

inline editfactory::providers::AttemptResult ok(std::string text) {
  editfactory::providers::AttemptResult r;
  r.text = std::move(text);
  return r;
}

inline editfactory::providers::AttemptResult http_error(int status, std::string body = "error") {
  editfactory::providers::AttemptResult r;
  r.kind = editfactory::providers::AttemptResult::Kind::kHttpError;
  r.status = status;
  r.body = std::move(body);
  return r;
}

inline editfactory::providers::ProviderConfig test_provider(std::string name = "test") {
  editfactory::providers::ProviderConfig c;
  c.name = std::move(name);
  c.endpoint = "mock://unused";
  c.model_id = "test-model";
  c.max_retries = 3;
  c.backoff_base_ms = 1;
  c.backoff_cap_ms = 4;
  return c;
}

inline editfactory::providers::Sleeper no_sleep() {
  return [](std::chrono::milliseconds) {};
}

// Ingests n pairs (categories cycle Semantic, Stylistic, Structural) and
// returns their ids in manifest order.
inline std::vector<std::string> add_pairs(const fs::path& dir, editfactory::corpus::Store& store, int n,
                                          int seed_base = 0) {
  static const char* kCats[][2] = {{"Semantic", "ReplaceObject"}, {"Stylistic", "ColorAlteration"},
                                   {"Structural", "ViewChange"}};
  std::string manifest;
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) {
    const int k = seed_base + i;
    const auto s = "img/s" + std::to_string(k) + ".png", t = "img/t" + std::to_string(k) + ".png";
    const auto sb = make_png(8, 8, 2 * k + 1), tb = make_png(8, 8, 2 * k + 2);
    write_bytes(dir / s, sb);
    write_bytes(dir / t, tb);
    manifest += nlohmann::json{{"source_uri", s}, {"target_uri", t}, {"category", kCats[i % 3][0]},
                               {"subtype", kCats[i % 3][1]}}
                    .dump() +
                "\n";
    ids.push_back(editfactory::corpus::pair_id_for(sb, tb));
  }
  const auto path = dir / ("manifest-" + std::to_string(seed_base) + ".jsonl");
  write_text(path, manifest);
  editfactory::corpus::ingest_pairs(store, path);
  return ids;
}

inline editfactory::corpus::Instruction model_text(const std::string& text, const std::string& model = "gen") {
  return editfactory::corpus::make_instruction(text, {editfactory::corpus::ProducerKind::kModel, model},
                                               "2026-01-01T00:00:00Z");
}

inline editfactory::corpus::Instruction human_text(const std::string& text, const std::string& who = "ann") {
  return editfactory::corpus::make_instruction(text, {editfactory::corpus::ProducerKind::kHuman, who},
                                               "2026-01-01T00:00:00Z");
}

}  // namespace testsupport
