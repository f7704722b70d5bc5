#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "editfactory/human_eval.hpp"
#include "editfactory/reporting.hpp"
#include "support/test_support.hpp"

using namespace editfactory;
using namespace editfactory::human_eval;
using nlohmann::json;
using testsupport::TempDir;

namespace {

std::vector<corpus::DatasetRow> rows_for(const std::string& model, int n) {
  std::vector<corpus::DatasetRow> rows;
  for (int i = 0; i < n; ++i) rows.push_back({"pair" + std::to_string(1000 + i), model, "Instruction " + std::to_string(i)});
  return rows;
}

DefectAnnotation annotation(const std::string& task, std::vector<Defect> defects, bool attest = false,
                            const std::string& who = "ann1") {
  DefectAnnotation a;
  a.task_id = task;
  a.annotator_id = who;
  a.defects = std::move(defects);
  a.attest_no_p0 = attest;
  return a;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

// Outcome for the i-th of 400 tasks: 264 correct, 84 P0, 48 P1, 4 P2.
DefectAnnotation table_outcome(const std::string& task, int i) {
  if (i < 264) return annotation(task, {});
  if (i < 348) return annotation(task, {{Severity::kP0, 2 + i % 3, ""}});
  if (i < 396) return annotation(task, {{Severity::kP1, 5, ""}}, true);
  return annotation(task, {{Severity::kP2, 7, ""}}, true);
}

}  // namespace

TEST(Checklist, LegalityTableMatchesAllEightRows) {
  const auto& cl = Checklist::builtin();
  EXPECT_EQ(cl.version(), "v1");
  ASSERT_EQ(cl.categories().size(), 8u);
  const std::map<int, std::set<Severity>> legal = {
      {1, {Severity::kP0, Severity::kP1}}, {2, {Severity::kP0, Severity::kP1}}, {3, {Severity::kP0, Severity::kP1}},
      {4, {Severity::kP0}},                {5, {Severity::kP1}},                {6, {Severity::kP1}},
      {7, {Severity::kP2}},                {8, {Severity::kP2}}};
  for (const auto& [id, allowed] : legal) {
    for (Severity s : {Severity::kP0, Severity::kP1, Severity::kP2}) {
      EXPECT_EQ(cl.allows(id, s), allowed.count(s) == 1) << id << " " << to_string(s);
    }
  }
  EXPECT_EQ(cl.find(4)->title, "Viewpoint and Spatial Relation Error");
  EXPECT_EQ(cl.find(7)->title, "Redundant or Verbose Description");
  EXPECT_FALSE(cl.allows(9, Severity::kP2));
}

TEST(Checklist, LoadsFromDataWithValidation) {
  const auto cl = Checklist::from_json(
      {{"version", "v2"}, {"categories", {{{"id", 1}, {"title", "X"}, {"severity_options", {"P2"}}}}}});
  EXPECT_EQ(cl.version(), "v2");
  EXPECT_TRUE(cl.allows(1, Severity::kP2));
  EXPECT_THROW(Checklist::from_json({{"version", "v"}, {"categories", {{{"id", 1}, {"title", "Y"}, {"severity_options", {"P9"}}}}}}),
               Error);
}

TEST(Annotation, ValidationOrderAndHierarchy) {
  TempDir dir;
  corpus::Store store(dir / "data", fixed_clock("2026-01-01T00:00:00Z"));
  create_tasks(store, "d", rows_for("m", 6));
  const auto ts = tasks::list_tasks(store, tasks::TaskKind::kHumanEval, "d");
  ASSERT_EQ(ts.size(), 6u);

  EXPECT_EQ(code_of([&] { record_annotation(store, annotation(ts[0].id, {{Severity::kP1, 4, ""}}, true)); }),
            ErrorCode::kIllegalSeverityForCategory);
  EXPECT_EQ(code_of([&] { record_annotation(store, annotation(ts[0].id, {{Severity::kP0, 7, ""}})); }),
            ErrorCode::kIllegalSeverityForCategory);
  EXPECT_EQ(code_of([&] {
              record_annotation(store, annotation(ts[0].id, {{Severity::kP0, 4, ""}, {Severity::kP2, 7, ""}}, true));
            }),
            ErrorCode::kHierarchyViolation);
  EXPECT_EQ(code_of([&] { record_annotation(store, annotation(ts[0].id, {{Severity::kP1, 5, ""}})); }),
            ErrorCode::kHierarchyViolation);
  EXPECT_EQ(code_of([&] { record_annotation(store, annotation("human_eval-nope", {})); }), ErrorCode::kNotFound);

  // Lower-severity marks alongside the worst one are dropped.
  const auto stored =
      record_annotation(store, annotation(ts[1].id, {{Severity::kP2, 8, "typo"}, {Severity::kP1, 6, "leak"}}, true));
  ASSERT_EQ(stored.defects.size(), 1u);
  EXPECT_EQ(stored.defects[0].severity, Severity::kP1);
  EXPECT_EQ(bucket_of(*annotation_for(store, ts[1].id)), Bucket::kP1);

  EXPECT_EQ(code_of([&] { record_annotation(store, annotation(ts[1].id, {})); }), ErrorCode::kDuplicateAnnotation);
  EXPECT_EQ(code_of([&] { record_annotation(store, annotation(ts[1].id, {}, false, "ann2")); }), ErrorCode::kTaskClosed);

  record_annotation(store, annotation(ts[2].id, {{Severity::kP0, 1, ""}, {Severity::kP0, 4, ""}}));
  EXPECT_EQ(annotation_for(store, ts[2].id)->defects.size(), 2u);
  EXPECT_EQ(code_of([&] { aggregate_rates(store, "d"); }), ErrorCode::kIncompleteDataset);
  EXPECT_EQ(code_of([&] { aggregate_rates(store, "other"); }), ErrorCode::kEmptyDataset);
}

TEST(Annotation, NoTaskStoresP0AlongsideLowerSeverities) {
  TempDir dir;
  corpus::Store store(dir / "data", fixed_clock("2026-01-01T00:00:00Z"));
  create_tasks(store, "d", rows_for("m", 200));
  std::mt19937 rng(13);
  const auto& cl = Checklist::builtin();
  for (const auto& t : tasks::list_tasks(store, tasks::TaskKind::kHumanEval, "d")) {
    std::vector<Defect> defects;
    for (int k = 0, n = static_cast<int>(rng() % 4); k < n; ++k) {
      defects.push_back({static_cast<Severity>(rng() % 3), 1 + static_cast<int>(rng() % 8), ""});
    }
    try {
      record_annotation(store, annotation(t.id, defects, rng() % 2 == 0));
    } catch (const Error&) {
    }
  }
  for (const auto& [key, value] : store.list("annotations")) {
    const auto a = value.get<DefectAnnotation>();
    std::set<Severity> sev;
    for (const auto& d : a.defects) {
      sev.insert(d.severity);
      EXPECT_TRUE(cl.allows(d.category_id, d.severity));
    }
    EXPECT_LE(sev.size(), 1u) << key;
  }
}

TEST(Rates, TableBreakdownAndReport) {
  TempDir dir;
  corpus::Store store(dir / "data", fixed_clock("2026-01-01T00:00:00Z"));
  create_tasks(store, "inhouse", rows_for("gemini", 400));
  const auto ts = tasks::list_tasks(store, tasks::TaskKind::kHumanEval, "inhouse");
  for (std::size_t i = 0; i < ts.size(); ++i) record_annotation(store, table_outcome(ts[i].id, static_cast<int>(i)));
  const auto rates = aggregate_rates(store, "inhouse").at("gemini");
  EXPECT_EQ(rates.percent[0].to_string(2), "66.00");
  EXPECT_EQ(rates.percent[1].to_string(2), "21.00");
  EXPECT_EQ(rates.percent[2].to_string(2), "12.00");
  EXPECT_EQ(rates.percent[3].to_string(2), "1.00");

  const auto report = reporting::human_report(store, "inhouse");
  const auto csv = reporting::render(report, reporting::Format::kCsv);
  EXPECT_EQ(csv, "model,correct,p0,p1,p2,total\ngemini,66.00,21.00,12.00,1.00,400\n");
  const auto j = json::parse(reporting::render(report, reporting::Format::kJson));
  EXPECT_DOUBLE_EQ(j["models"][0]["p0"].get<double>(), 21.0);
  EXPECT_EQ(j["models"][0]["p0_count"], 84);

  const auto log = export_annotations_jsonl(store, "inhouse");
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 400);
}

TEST(Rates, LargestRemainderAlwaysSumsToHundred) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 997;
    std::vector<Bucket> buckets(n);
    std::array<std::int64_t, 4> counts{};
    for (auto& b : buckets) {
      b = static_cast<Bucket>(rng() % 4);
      ++counts[static_cast<int>(b)];
    }
    const auto r = rates_from_buckets(buckets);
    std::int64_t sum = 0;
    for (int i = 0; i < 4; ++i) {
      EXPECT_EQ(r.counts[i], static_cast<std::size_t>(counts[i]));
      sum += r.percent[i].units();
      // Each rate lies within one hundredth of its exact share.
      const double exact = 100.0 * counts[i] / n;
      EXPECT_LT(std::fabs(r.percent[i].to_double() - exact), 0.01 + 1e-9);
      EXPECT_EQ(r.percent[i].units() % (Decimal::kScale / 100), 0);
    }
    EXPECT_EQ(sum, 100 * Decimal::kScale);
  }
  // Three equal thirds: the spare hundredth goes to the earliest bucket.
  const std::vector<Bucket> thirds = {Bucket::kCorrect, Bucket::kP0, Bucket::kP1};
  const auto r = rates_from_buckets(thirds);
  EXPECT_EQ(r.percent[0].to_string(2), "33.34");
  EXPECT_EQ(r.percent[1].to_string(2), "33.33");
  EXPECT_THROW(rates_from_buckets({}), Error);
}

TEST(Annotation, ConcurrentSubmissionsCloseOnce) {
  TempDir dir;
  corpus::Store store(dir / "data", fixed_clock("2026-01-01T00:00:00Z"));
  create_tasks(store, "d", rows_for("m", 1));
  const auto id = tasks::list_tasks(store)[0].id;
  std::atomic<int> ok{0}, closed{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 16; ++i) {
    threads.emplace_back([&, i] {
      try {
        record_annotation(store, annotation(id, {}, false, "ann" + std::to_string(i)));
        ++ok;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kTaskClosed || e.code() == ErrorCode::kDuplicateAnnotation) ++closed;
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok.load(), 1);
  EXPECT_EQ(closed.load(), 15);
  EXPECT_EQ(store.list("annotations").size(), 1u);
}
