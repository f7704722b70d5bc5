#include <gtest/gtest.h>
#include <openssl/evp.h>

#include <random>

#include "editfactory/corpus.hpp"
#include "editfactory/dataset.hpp"
#include "editfactory/image_probe.hpp"
#include "editfactory/store.hpp"
#include "support/test_support.hpp"

using namespace editfactory;
using namespace editfactory::corpus;
using nlohmann::json;
using testsupport::TempDir;

namespace {

std::string openssl_sha256(const Bytes& data) {
  unsigned char md[32];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

Bytes be64(std::uint64_t n) {
  Bytes b;
  for (int i = 7; i >= 0; --i) b.push_back(static_cast<std::uint8_t>(n >> (8 * i)));
  return b;
}

json manifest_row(const std::string& src, const std::string& tgt, const std::string& cat = "Semantic",
                  const std::string& sub = "AddObject") {
  return {{"source_uri", src}, {"target_uri", tgt}, {"category", cat}, {"subtype", sub}};
}

void seed_pairs(const TempDir& dir, Store& store, int n_sem, int n_sty, int n_str) {
  std::string manifest;
  int k = 0;
  auto add = [&](const char* cat, const char* sub, int n) {
    for (int i = 0; i < n; ++i, ++k) {
      const auto s = "img/s" + std::to_string(k) + ".png", t = "img/t" + std::to_string(k) + ".png";
      testsupport::write_bytes(dir / s, testsupport::make_png(4, 4, 2 * k + 1));
      testsupport::write_bytes(dir / t, testsupport::make_png(4, 4, 2 * k + 2));
      manifest += manifest_row(s, t, cat, sub).dump() + "\n";
    }
  };
  add("Semantic", "AddObject", n_sem);
  add("Stylistic", "StyleTransfer", n_sty);
  add("Structural", "ViewChange", n_str);
  testsupport::write_text(dir / "manifest.jsonl", manifest);
  const auto rep = ingest_pairs(store, dir / "manifest.jsonl");
  ASSERT_EQ(rep.accepted, static_cast<std::size_t>(n_sem + n_sty + n_str));
}

}  // namespace

TEST(Taxonomy, LegalityTable) {
  const std::map<Category, std::vector<std::string>> expected = {
      {Category::kSemantic, {"AddObject", "RemoveObject", "ReplaceObject", "BackgroundChange"}},
      {Category::kStylistic, {"ColorAlteration", "StyleTransfer", "ToneTransformation", "MaterialModification"}},
      {Category::kStructural, {"ViewChange", "MotionChange", "PortraitChange", "TextModification", "Hybrid"}},
  };
  for (const auto& [cat, subs] : expected) {
    for (Category other : kAllCategories) {
      for (const auto& s : subs) {
        const auto parsed = parse_subtype(s);
        ASSERT_TRUE(parsed) << s;
        EXPECT_EQ(is_legal(other, *parsed), other == cat) << s;
      }
    }
    EXPECT_EQ(subtypes_of(cat).size(), subs.size());
  }
  EXPECT_THROW(make_label("Semantic", "ViewChange"), Error);
  EXPECT_THROW(make_label("Semantic", "Teleport"), Error);
  EXPECT_THROW(make_label("Cosmic", "AddObject"), Error);
}

TEST(PairId, MatchesIndependentDigestOverRandomBlobs) {
  std::mt19937 rng(42);
  for (int i = 0; i < 200; ++i) {
    Bytes a(rng() % 300), b(rng() % 300);
    for (auto& x : a) x = static_cast<std::uint8_t>(rng());
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    Bytes framed = be64(a.size());
    framed.insert(framed.end(), a.begin(), a.end());
    const Bytes lb = be64(b.size());
    framed.insert(framed.end(), lb.begin(), lb.end());
    framed.insert(framed.end(), b.begin(), b.end());
    EXPECT_EQ(pair_id_for(a, b), openssl_sha256(framed));
    EXPECT_EQ(pair_id_for(a, b), pair_id_for(Bytes(a), Bytes(b)));
  }
  // Length prefixing keeps different splits of the same bytes apart.
  const Bytes ab = {1, 2, 3};
  EXPECT_NE(pair_id_for(Bytes{1}, Bytes{2, 3}), pair_id_for(Bytes{1, 2}, Bytes{3}));
  (void)ab;
}

TEST(ImageProbe, RecognizesPngAndRejectsDamage) {
  auto png = testsupport::make_png(7, 3, 1);
  auto info = probe_image(png);
  ASSERT_TRUE(info);
  EXPECT_EQ(info->format, "png");
  EXPECT_EQ(info->width, 7u);
  EXPECT_EQ(info->height, 3u);
  Bytes truncated(png.begin(), png.begin() + static_cast<long>(png.size() - 5));
  EXPECT_FALSE(probe_image(truncated));
  png[20] ^= 0xFF;  // inside IHDR: CRC no longer matches
  EXPECT_FALSE(probe_image(png));
  EXPECT_FALSE(probe_image(Bytes{'h', 'e', 'l', 'l', 'o'}));
}

TEST(Ingest, AcceptsDedupsAndReportsBadLines) {
  TempDir dir;
  testsupport::write_bytes(dir / "a.png", testsupport::make_png(4, 4, 1));
  testsupport::write_bytes(dir / "b.png", testsupport::make_png(4, 4, 2));
  testsupport::write_bytes(dir / "b_copy.png", testsupport::make_png(4, 4, 2));
  testsupport::write_text(dir / "junk.png", "not an image");
  std::string m;
  m += manifest_row("a.png", "b.png").dump() + "\n";
  m += manifest_row("a.png", "b.png").dump() + "\n";           // duplicate bytes
  m += manifest_row("a.png", "a.png").dump() + "\n";           // same locator
  m += manifest_row("b.png", "b_copy.png").dump() + "\n";      // same bytes
  m += manifest_row("a.png", "junk.png").dump() + "\n";        // undecodable
  m += manifest_row("a.png", "missing.png").dump() + "\n";     // unreadable
  m += manifest_row("a.png", "b.png", "Semantic", "Hybrid").dump() + "\n";  // illegal taxonomy
  m += "{not json\n";
  testsupport::write_text(dir / "m.jsonl", m);

  Store store(dir / "data", fixed_clock("2026-01-01T00:00:00Z"));
  const auto rep = ingest_pairs(store, dir / "m.jsonl");
  EXPECT_EQ(rep.accepted, 1u);
  EXPECT_EQ(rep.duplicates, 1u);
  ASSERT_EQ(rep.rejected.size(), 6u);
  EXPECT_EQ(rep.rejected[0].code, ErrorCode::kIdenticalImages);
  EXPECT_EQ(rep.rejected[1].code, ErrorCode::kIdenticalImages);
  EXPECT_EQ(rep.rejected[2].code, ErrorCode::kUndecodableImage);
  EXPECT_EQ(rep.rejected[3].code, ErrorCode::kUndecodableImage);
  EXPECT_EQ(rep.rejected[4].code, ErrorCode::kIllegalTaxonomy);
  EXPECT_EQ(rep.rejected[5].code, ErrorCode::kInvalidArgument);
  EXPECT_EQ(rep.rejected[0].line, 3u);

  const auto pairs = store.pairs();
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].id, pair_id_for(read_file_bytes(dir / "a.png"), read_file_bytes(dir / "b.png")));
  EXPECT_EQ(store.read_object(pairs[0].source_object), read_file_bytes(dir / "a.png"));

  // Re-ingesting identical bytes keeps the id.
  Store again(dir / "data");
  EXPECT_EQ(ingest_pairs(again, dir / "m.jsonl").duplicates, 2u);
  EXPECT_EQ(again.pairs().size(), 1u);
}

TEST(Store, ReplayRestoresStateAndDropsTornTail) {
  TempDir dir;
  {
    Store store(dir / "data", fixed_clock("2026-01-01T00:00:00Z"));
    store.put("misc", "k1", json{{"v", 1}});
    store.put("misc", "k1", json{{"v", 2}});
    store.put("misc", "k0", json{{"v", 0}});
  }
  {
    std::ofstream out(dir / "data" / "events.jsonl", std::ios::app);
    out << "{\"seq\":4,\"collection\":\"mi";
  }
  Store store(dir / "data");
  EXPECT_EQ(store.get("misc", "k1")->at("v"), 2);
  const auto listed = store.list("misc");
  ASSERT_EQ(listed.size(), 2u);
  EXPECT_EQ(listed[0].first, "k0");
  EXPECT_EQ(store.events().size(), 3u);
}

TEST(Store, TripletLifecycleIsMonotone) {
  TempDir dir;
  Store store(dir / "data", fixed_clock("2026-01-01T00:00:00Z"));
  seed_pairs(dir, store, 2, 0, 0);
  const auto ids = store.pairs();
  const auto model = Producer{ProducerKind::kModel, "gen"};
  const auto human = Producer{ProducerKind::kHuman, "ann"};
  store.create_triplet(ids[0].id, make_instruction("Add a red hat.", model, store.now()));
  EXPECT_THROW(store.create_triplet(ids[0].id, make_instruction("again", model, store.now())), Error);
  EXPECT_THROW(store.create_triplet("nope", make_instruction("x", model, store.now())), Error);
  EXPECT_THROW(make_instruction("   ", model, ""), Error);

  EXPECT_THROW(store.set_refined(ids[0].id, make_instruction("Refined", human, "")), Error);  // Drafted -> Refined
  store.set_status(ids[0].id, TripletStatus::kFiltered);
  EXPECT_THROW(store.set_status(ids[0].id, TripletStatus::kDrafted), Error);
  store.set_status(ids[0].id, TripletStatus::kRefinementPending);
  EXPECT_THROW(store.set_refined(ids[0].id, make_instruction("Refined", model, "")), Error);  // must be human
  store.set_refined(ids[0].id, make_instruction("Add a red wool hat on the man's head.", human, store.now()));
  EXPECT_THROW(store.set_status(ids[0].id, TripletStatus::kRejected), Error);  // Refined is terminal

  store.create_triplet(ids[1].id, make_instruction("Remove it.", model, store.now()));
  store.set_status(ids[1].id, TripletStatus::kRejected);
  EXPECT_THROW(store.set_status(ids[1].id, TripletStatus::kFiltered), Error);

  // Replay the log: every triplet's status sequence is nondecreasing, refined iff Refined.
  auto rank = [](TripletStatus s) {
    switch (s) {
      case TripletStatus::kDrafted: return 0;
      case TripletStatus::kFiltered: return 1;
      case TripletStatus::kRefinementPending: return 2;
      case TripletStatus::kRefined: return 3;
      case TripletStatus::kRejected: return 4;
    }
    return -1;
  };
  std::map<std::string, int> last;
  for (const auto& ev : store.events()) {
    if (ev.at("collection") != "triplets") continue;
    const auto rec = ev.at("data").get<TripletRecord>();
    const int r = rank(rec.status);
    EXPECT_GE(r, last.count(rec.pair_id) ? last[rec.pair_id] : 0);
    EXPECT_EQ(rec.refined.has_value(), rec.status == TripletStatus::kRefined);
    last[rec.pair_id] = r;
  }
  EXPECT_EQ(store.model_outputs(ids[0].id).size(), 1u);
}

TEST(Store, GroundTruthValidation) {
  GroundTruth gt{"p", {"a", ""}, {}, "d"};
  EXPECT_THROW(validate(gt), Error);
  gt.primary_changes = {"a"};
  gt.secondary_changes = {" "};
  EXPECT_THROW(validate(gt), Error);
  gt.secondary_changes = {};
  EXPECT_NO_THROW(validate(gt));
}

TEST(Sampler, QuotasConserveN) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = rng() % 1000;
    double a = (rng() % 1000) / 1000.0, b = (rng() % 1000) / 1000.0;
    if (a + b > 1) {
      a = 1 - a;
      b = 1 - b;
    }
    const std::map<Category, double> targets = {
        {Category::kSemantic, a}, {Category::kStylistic, b}, {Category::kStructural, 1.0 - a - b}};
    const auto q = category_quotas(n, targets);
    std::size_t sum = 0;
    for (auto& [c, k] : q) {
      sum += k;
      EXPECT_LE(std::fabs(static_cast<double>(k) - n * targets.at(c)), 1.0 + 1e-9);
    }
    EXPECT_EQ(sum, n);
  }
  EXPECT_THROW(category_quotas(10, {{Category::kSemantic, 0.5}}), Error);
}

TEST(Sampler, BalancedDeterministicAndSubstitutes) {
  TempDir dir;
  Store store(dir / "data", fixed_clock("2026-01-01T00:00:00Z"));
  seed_pairs(dir, store, 6, 4, 2);
  const std::map<Category, double> targets = {
      {Category::kSemantic, 0.5}, {Category::kStylistic, 0.25}, {Category::kStructural, 0.25}};
  const auto a = sample_balanced(store, 8, targets, {.seed = 9});
  const auto b = sample_balanced(store, 8, targets, {.seed = 9});
  ASSERT_EQ(a.size(), 8u);
  std::map<Category, int> counts;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    counts[a[i].taxonomy.category]++;
  }
  EXPECT_EQ(counts[Category::kSemantic], 4);
  EXPECT_EQ(counts[Category::kStylistic], 2);
  EXPECT_EQ(counts[Category::kStructural], 2);

  const std::map<Category, double> heavy = {{Category::kStructural, 1.0}};
  EXPECT_THROW(sample_balanced(store, 4, heavy), Error);
  const auto sub = sample_balanced(store, 4, heavy, {.seed = 0, .allow_substitution = true});
  EXPECT_EQ(sub.size(), 4u);
  EXPECT_THROW(sample_balanced(store, 13, targets, {.seed = 0, .allow_substitution = true}), Error);
}

TEST(Dataset, RowsRoundTripThroughStoreAndFile) {
  TempDir dir;
  Store store(dir / "data", fixed_clock("2026-01-01T00:00:00Z"));
  testsupport::write_text(dir / "rows.jsonl",
                          "{\"pair_id\":\"p2\",\"model\":\"m\",\"instruction\":\"b\"}\n"
                          "{\"pair_id\":\"p1\",\"model\":\"m\",\"instruction\":\"a\"}\n");
  const auto from_file = load_dataset(store, (dir / "rows.jsonl").string());
  ASSERT_EQ(from_file.size(), 2u);
  EXPECT_EQ(from_file[0].pair_id, "p1");
  put_dataset_rows(store, "bench", from_file);
  EXPECT_EQ(load_dataset(store, "bench"), from_file);
  EXPECT_THROW(load_dataset(store, "absent"), Error);

  testsupport::write_text(dir / "gt.jsonl",
                          "{\"pair_id\":\"p1\",\"primary_changes\":[\"x\"],\"secondary_changes\":[],"
                          "\"overall_description\":\"d\"}\n");
  EXPECT_EQ(load_ground_truth(store, dir / "gt.jsonl"), 1u);
  EXPECT_EQ(store.ground_truth("p1")->primary_changes.front(), "x");
}
