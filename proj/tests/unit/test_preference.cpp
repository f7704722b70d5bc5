#include <gtest/gtest.h>

#include <cmath>
#include <atomic>
#include <random>
#include <sstream>

#include "editfactory/preference.hpp"
#include "editfactory/tasks.hpp"
#include "support/test_support.hpp"

using namespace editfactory;
using namespace editfactory::preference;
using nlohmann::json;
using testsupport::TempDir;

namespace {

// -log(sigmoid(x)) in extended precision, independent of the library path.
long double neg_log_sigmoid(long double x) { return std::log1p(std::exp(-x)); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

struct Refined {
  TempDir dir;
  corpus::Store store{dir / "data", fixed_clock("2026-01-01T00:00:00Z")};
  std::vector<std::string> ids;

  explicit Refined(int n) {
    ids = testsupport::add_pairs(dir.path(), store, n);
    for (int i = 0; i < n; ++i) {
      store.create_triplet(ids[i], testsupport::model_text("Edit the picture " + std::to_string(i) + "."));
      store.set_status(ids[i], corpus::TripletStatus::kFiltered);
      store.set_status(ids[i], corpus::TripletStatus::kRefinementPending);
      store.set_refined(ids[i], testsupport::human_text("Rotate the blue chair 90 degrees clockwise, pair " +
                                                        std::to_string(i) + "."));
    }
  }
};

}  // namespace

TEST(Sft, ZeroLogProbsGiveZeroLoss) {
  const std::vector<double> zeros(17, 0.0);
  EXPECT_EQ(sft_loss(zeros), 0.0);
  EXPECT_EQ(sft_loss(zeros, true), 0.0);
}

TEST(Sft, UniformVocabularyGivesLogV) {
  for (int v : {2, 7, 1000, 151936}) {
    const std::vector<double> lp(33, -std::log(static_cast<double>(v)));
    EXPECT_NEAR(sft_loss(lp), std::log(static_cast<double>(v)), 1e-12);
    EXPECT_NEAR(sft_loss(lp, true), 33 * std::log(static_cast<double>(v)), 1e-9);
  }
}

TEST(Sft, NonNegativeWithEqualityOnlyAtZero) {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(-5, 0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> lp(1 + rng() % 20);
    for (auto& x : lp) x = u(rng);
    lp[0] = std::min(lp[0], -1e-9);
    EXPECT_GT(sft_loss(lp), 0.0);
  }
  EXPECT_EQ(code_of([] { sft_loss({}); }), ErrorCode::kEmptySequence);
  EXPECT_EQ(code_of([] { sft_loss(std::vector<double>{0.1}); }), ErrorCode::kInvalidLogProb);
  EXPECT_EQ(code_of([] { sft_loss(std::vector<double>{NAN}); }), ErrorCode::kInvalidLogProb);
}

TEST(Dpo, ZeroMarginIsLn2) {
  for (double beta : {0.01, 0.1, 1.0, 5.0}) EXPECT_NEAR(dpo_loss_from_margin(beta, 0.0), std::log(2.0), 1e-12);
  const std::vector<double> a = {-1.0, -2.0}, b = {-0.5};
  EXPECT_NEAR(dpo_loss(a, b, a, b, {.beta = 0.1}), std::log(2.0), 1e-12);
}

TEST(Dpo, MatchesExtendedPrecisionOracle) {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> m(-30, 30), b(0.01, 3);
  for (int i = 0; i < 2000; ++i) {
    const double beta = b(rng), margin = m(rng);
    const double want = static_cast<double>(neg_log_sigmoid(static_cast<long double>(beta) * margin));
    EXPECT_NEAR(dpo_loss_from_margin(beta, margin), want, 1e-12 * std::max(1.0, want));
  }
}

TEST(Dpo, SequenceLogProbsEnterAsSums) {
  const std::vector<double> pc = {-0.5, -0.25}, pr = {-2.0}, rc = {-1.0}, rr = {-1.0, -0.5};
  // (pc - rc) - (pr - rr) = (-0.75 + 1) - (-2 + 1.5) = 0.75
  EXPECT_NEAR(dpo_loss(pc, pr, rc, rr, {.beta = 2.0}), static_cast<double>(neg_log_sigmoid(1.5L)), 1e-12);
  // Length-normalized: (-0.375 + 1) - (-2 + 0.75) = 1.875
  EXPECT_NEAR(dpo_loss(pc, pr, rc, rr, {.beta = 2.0, .length_normalized = true}),
              static_cast<double>(neg_log_sigmoid(3.75L)), 1e-12);
  EXPECT_EQ(code_of([&] { dpo_loss(pc, pr, rc, rr, {}); }), ErrorCode::kNonPositiveBeta);
  EXPECT_EQ(code_of([&] { dpo_loss(pc, {}, rc, rr, {.beta = 1}); }), ErrorCode::kEmptySequence);
  EXPECT_EQ(code_of([&] { dpo_loss_from_margin(-1, 0); }), ErrorCode::kNonPositiveBeta);
}

TEST(Dpo, GradientAgreesWithFiniteDifferences) {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> m(-10, 10), b(0.05, 2);
  for (int i = 0; i < 100; ++i) {
    const double beta = b(rng), margin = m(rng), h = 1e-5;
    const double fd = (dpo_loss_from_margin(beta, margin + h) - dpo_loss_from_margin(beta, margin - h)) / (2 * h);
    const double an = dpo_loss_gradient(beta, margin);
    EXPECT_LE(std::fabs(fd - an), 1e-6 * std::fabs(an)) << beta << " " << margin;
  }
}

TEST(Dpo, ScaleAbsorptionMonotonicityAndLimits) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> m(-20, 20), b(0.01, 5);
  for (int i = 0; i < 5000; ++i) {
    const double beta = b(rng), x = m(rng), y = m(rng);
    EXPECT_NEAR(dpo_loss_from_margin(beta, x), dpo_loss_from_margin(1.0, beta * x), 1e-12);
    EXPECT_GT(dpo_loss_from_margin(beta, x), 0.0);
    if (x < y) EXPECT_GT(dpo_loss_from_margin(beta, x), dpo_loss_from_margin(beta, y));
  }
  EXPECT_LT(dpo_loss_from_margin(1.0, 50.0), 1e-20);
  EXPECT_GT(dpo_loss_from_margin(1.0, 700.0), 0.0);
  EXPECT_TRUE(std::isfinite(dpo_loss_from_margin(1.0, -800.0)));
}

TEST(PreferencePairs, ProvenanceRules) {
  Refined r(2);
  const std::string draft = "Edit the picture 0.";
  EXPECT_EQ(code_of([&] { build_pair(r.store, "nope", draft, "x", {FailureMode::kLackOfDetail}, "a"); }),
            ErrorCode::kNotFound);
  EXPECT_EQ(code_of([&] { build_pair(r.store, r.ids[0], draft, "x", {}, "a"); }), ErrorCode::kEmptyModes);
  EXPECT_EQ(code_of([&] { build_pair(r.store, r.ids[0], draft, "  Edit the   picture 0. ", {FailureMode::kLackOfDetail}, "a"); }),
            ErrorCode::kIdenticalTexts);
  EXPECT_EQ(code_of([&] { build_pair(r.store, r.ids[0], "Invented text.", "x", {FailureMode::kLackOfDetail}, "a"); }),
            ErrorCode::kUnknownDraft);
  // A draft belonging to another pair is not provenance for this one.
  EXPECT_EQ(code_of([&] { build_pair(r.store, r.ids[0], "Edit the picture 1.", "x", {FailureMode::kLackOfDetail}, "a"); }),
            ErrorCode::kUnknownDraft);

  const auto p = build_pair(r.store, r.ids[0], "Edit  the picture 0.", "Turn the chair to face left.",
                            {FailureMode::kViewpointAmbiguity, FailureMode::kOrientationInconsistency,
                             FailureMode::kViewpointAmbiguity},
                            "ann7", "left/right swapped");
  EXPECT_EQ(p.chosen.producer.kind, corpus::ProducerKind::kHuman);
  EXPECT_EQ(p.rejected.producer.kind, corpus::ProducerKind::kModel);
  EXPECT_EQ(p.rejected.text, draft);
  EXPECT_EQ(p.failure_modes, (std::vector<FailureMode>{FailureMode::kOrientationInconsistency,
                                                       FailureMode::kViewpointAmbiguity}));
  const auto stored = preference_pairs(r.store);
  ASSERT_EQ(stored.size(), 1u);
  EXPECT_EQ(json(stored[0]).dump(), json(p).dump());
}

TEST(Exports, SftAndDpoAreDeterministicAndParseBack) {
  Refined r(3);
  r.store.record_model_output(r.ids[1], testsupport::model_text("Rotate the chair.", "sft-model"));
  build_pair(r.store, r.ids[1], "Rotate the chair.", "Rotate the blue chair 90 degrees clockwise.",
             {FailureMode::kLackOfDetail}, "ann1");
  build_pair(r.store, r.ids[0], "Edit the picture 0.", "Rotate the blue chair 90 degrees clockwise.",
             {FailureMode::kLackOfDetail}, "ann1");

  const auto sft1 = export_sft(r.store, r.dir / "out1" / "sft.jsonl");
  const auto sft2 = export_sft(r.store, r.dir / "out2" / "sft.jsonl");
  EXPECT_EQ(sft1.rows, 3u);
  EXPECT_EQ(sft1.sha256, sft2.sha256);
  const auto text = testsupport::read_text(r.dir / "out1" / "sft.jsonl");
  EXPECT_EQ(text, testsupport::read_text(r.dir / "out2" / "sft.jsonl"));
  EXPECT_EQ(sha256_hex(text), sft1.sha256);
  std::stringstream ss(text);
  std::string line, prev;
  int n = 0;
  while (std::getline(ss, line)) {
    const auto j = json::parse(line);
    EXPECT_GT(j["pair_id"].get<std::string>(), prev);
    prev = j["pair_id"].get<std::string>();
    EXPECT_NE(j["instruction"].get<std::string>().find("Rotate the blue chair"), std::string::npos);
    ++n;
  }
  EXPECT_EQ(n, 3);
  const auto manifest = json::parse(testsupport::read_text(r.dir / "out1" / "sft.jsonl.manifest.json"));
  EXPECT_EQ(manifest["rows"], 3);
  EXPECT_EQ(manifest["sha256"], sft1.sha256);

  const auto dpo = export_dpo(r.store, r.dir / "out1" / "dpo.jsonl");
  EXPECT_EQ(dpo.rows, 2u);
  std::stringstream ds(testsupport::read_text(r.dir / "out1" / "dpo.jsonl"));
  while (std::getline(ds, line)) {
    const auto j = json::parse(line);
    EXPECT_NE(j["chosen"], j["rejected"]);
    EXPECT_EQ(j["failure_modes"], json::array({"lack_of_detail"}));
  }

  auto drafted = r.store.triplets();
  drafted[0].status = corpus::TripletStatus::kFiltered;
  EXPECT_EQ(code_of([&] { export_sft(r.store, drafted, r.dir / "bad.jsonl"); }), ErrorCode::kUnrefinedRecord);
}

TEST(Tasks, RefineAndPreferenceTaskCreation) {
  TempDir dir;
  corpus::Store store(dir / "data", fixed_clock("2026-01-01T00:00:00Z"));
  const auto ids = testsupport::add_pairs(dir.path(), store, 3);
  for (const auto& id : ids) store.create_triplet(id, testsupport::model_text("Draft for " + id.substr(0, 6)));
  store.set_status(ids[0], corpus::TripletStatus::kFiltered);
  store.set_status(ids[1], corpus::TripletStatus::kFiltered);
  store.set_status(ids[2], corpus::TripletStatus::kRejected);
  EXPECT_EQ(tasks::create_refine_tasks(store), 2u);
  EXPECT_EQ(tasks::create_refine_tasks(store), 0u);
  EXPECT_EQ(store.triplet(ids[0])->status, corpus::TripletStatus::kRefinementPending);
  const auto refine = tasks::list_tasks(store, tasks::TaskKind::kRefine);
  ASSERT_EQ(refine.size(), 2u);
  EXPECT_EQ(refine[0].id.rfind("refine-", 0), 0u);
  EXPECT_EQ(refine[0].id.size(), std::string("refine-").size() + 16);

  store.set_refined(ids[0], testsupport::human_text("A much better instruction."));
  store.record_model_output(ids[0], testsupport::model_text("A much better instruction.", "sft"));  // equals refined
  store.record_model_output(ids[0], testsupport::model_text("Another model output.", "sft"));
  EXPECT_EQ(tasks::create_preference_tasks(store), 2u);  // draft + differing output
  const auto prefs = tasks::list_tasks(store, tasks::TaskKind::kPreference);
  for (const auto& t : prefs) {
    EXPECT_EQ(t.payload["chosen"], "A much better instruction.");
    EXPECT_NE(t.payload["rejected"], t.payload["chosen"]);
  }

  std::atomic<int> accepted{0};
  tasks::complete_task(store, prefs[0].id, "a", [&](const tasks::Task&) { ++accepted; });
  EXPECT_EQ(code_of([&] { tasks::complete_task(store, prefs[0].id, "b", [&](const tasks::Task&) { ++accepted; }); }),
            ErrorCode::kTaskClosed);
  // A rejected result keeps the task open.
  EXPECT_THROW(tasks::complete_task(store, prefs[1].id, "a",
                                    [](const tasks::Task&) { editfactory::raise(ErrorCode::kInvalidArgument, "bad"); }),
               Error);
  EXPECT_TRUE(tasks::get_task(store, prefs[1].id)->open);
  EXPECT_EQ(accepted.load(), 1);
  EXPECT_EQ(tasks::get_task(store, prefs[0].id)->closed_by, "a");
}
