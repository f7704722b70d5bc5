#include <gtest/gtest.h>

#include <sstream>

#include "editfactory/dataset.hpp"
#include "editfactory/evaluation.hpp"
#include "editfactory/reporting.hpp"
#include "support/test_support.hpp"

using namespace editfactory;
using namespace editfactory::judge;
using nlohmann::json;
using testsupport::TempDir;

namespace {

struct Planned {
  int accuracy;
  std::string completeness;
  std::string completeness_reasoning;
  std::string clarity;
};

// Splits "judge:<dim>:<model>:<pair>".
std::vector<std::string> split_tag(const std::string& tag) {
  std::vector<std::string> parts;
  std::stringstream ss(tag);
  std::string p;
  while (std::getline(ss, p, ':')) parts.push_back(p);
  return parts;
}

// A fixture judge that answers each (dimension, model, pair) from a plan.
class PlanJudge {
 public:
  std::map<std::string, std::map<std::string, Planned>> plan;  // model -> pair -> scores
  std::map<std::string, std::string> overrides;                // tag -> raw text

  std::shared_ptr<testsupport::ScriptedTransport> transport() {
    return std::make_shared<testsupport::ScriptedTransport>([this](const providers::ChatRequest& r, int) {
      if (auto o = overrides.find(r.tag); o != overrides.end()) return testsupport::ok(o->second);
      const auto parts = split_tag(r.tag);
      const Planned& p = plan.at(parts[2]).at(parts[3]);
      json v;
      if (parts[1] == "accuracy") v = {{"dimension", "accuracy"}, {"score", p.accuracy}, {"reasoning", "facts check out"}};
      if (parts[1] == "completeness")
        v = {{"dimension", "completeness"}, {"score", json::parse(p.completeness)}, {"reasoning", p.completeness_reasoning}};
      if (parts[1] == "clarity") v = {{"dimension", "clarity"}, {"score", json::parse(p.clarity)}, {"reasoning", "clear"}};
      return testsupport::ok("Step 1...\n" + v.dump());
    });
  }
};

struct Bench {
  TempDir dir;
  corpus::Store store{dir / "data", fixed_clock("2026-01-01T00:00:00Z")};
  std::vector<std::string> ids;

  explicit Bench(int n) {
    ids = testsupport::add_pairs(dir.path(), store, n);
    for (const auto& id : ids) {
      store.put_ground_truth({id, {"The lamp turns red.", "The chair is removed.", "A cat is added on the sofa."},
                              {"The rug is now striped."}, "A living room edit."});
    }
  }
};

}  // namespace

TEST(Evaluation, TableMeansReproduceFromPerSampleVerdicts) {
  Bench b(100);
  PlanJudge judge;
  std::vector<corpus::DatasetRow> rows;
  for (int i = 0; i < 100; ++i) {
    const auto& id = b.ids[i];
    // Mean accuracy 4.03, completeness 4.60, clarity 3.84 -> S 4.220.
    judge.plan["gpt-4.1"][id] = {i < 97 ? 4 : 5, i < 60 ? "5" : "4",
                                 i < 60 ? "3 changes, 3 hits" : "3 changes, 2 hits", i < 60 ? "3.8" : "3.9"};
    // Mean accuracy 4.70, completeness 4.85, clarity 4.43 -> S 4.706.
    judge.plan["gemini-3-pro"][id] = {i < 70 ? 5 : 4, i < 70 ? "5" : "4.5",
                                      i < 70 ? "3 changes, 3 hits" : "3 changes, 2 hits, rug covered: +0.5",
                                      i < 70 ? "4.4" : "4.5"};
    rows.push_back({id, "gpt-4.1", "Paint the lamp red, remove the chair and put a cat on the sofa."});
    rows.push_back({id, "gemini-3-pro", "Paint the lamp red, remove the chair, seat a cat on the sofa."});
  }
  auto cfg = testsupport::test_provider("judge");
  cfg.max_parallel = 8;
  providers::Client client(cfg, judge.transport(), testsupport::no_sleep());
  const auto samples = evaluate_rows(b.store, rows, client);
  ASSERT_EQ(samples.size(), 200u);
  for (const auto& s : samples) {
    ASSERT_TRUE(s.evaluated()) << s.pair_id;
    for (const auto& d : s.dimensions) EXPECT_TRUE(d.validated->log.empty());
  }

  const auto report = reporting::benchmark_report("bench", samples);
  ASSERT_EQ(report.models.size(), 2u);
  const auto& gem = report.models[0];
  const auto& gpt = report.models[1];
  EXPECT_EQ(gem.model, "gemini-3-pro");
  EXPECT_EQ(gem.mean_accuracy, Decimal::parse("4.70"));
  EXPECT_EQ(gem.mean_completeness, Decimal::parse("4.85"));
  EXPECT_EQ(gem.mean_clarity, Decimal::parse("4.43"));
  EXPECT_EQ(gem.mean_weighted, Decimal::parse("4.706"));
  EXPECT_EQ(gpt.mean_accuracy, Decimal::parse("4.03"));
  EXPECT_EQ(gpt.mean_completeness, Decimal::parse("4.60"));
  EXPECT_EQ(gpt.mean_clarity, Decimal::parse("3.84"));
  EXPECT_EQ(gpt.mean_weighted, Decimal::parse("4.220"));
  EXPECT_EQ(gpt.mean_weighted, gpt.composite_of_means);
}

TEST(Evaluation, RequestsAreDeterministicPerDimension) {
  Bench b(1);
  const auto pair = *b.store.pair(b.ids[0]);
  const auto gt = *b.store.ground_truth(b.ids[0]);
  const corpus::DatasetRow row{b.ids[0], "m1", "Paint the lamp red."};
  std::set<std::string> prompts;
  for (Dimension d : kAllDimensions) {
    const auto req = build_judge_request(b.store, pair, d, gt, row);
    EXPECT_EQ(req.temperature, 0.0);
    EXPECT_EQ(req.seed, 0);
    EXPECT_EQ(req.tag, "judge:" + std::string(to_string(d)) + ":m1:" + b.ids[0]);
    ASSERT_EQ(req.images.size(), 2u);
    EXPECT_EQ(req.images[0].role, "source");
    EXPECT_EQ(req.prompt, render_prompt(d, gt, row.instruction, row.model));
    prompts.insert(req.prompt);
  }
  EXPECT_EQ(prompts.size(), 3u);
}

TEST(Evaluation, FailuresLeaveSamplesUnevaluatedWithoutImputation) {
  Bench b(3);
  PlanJudge judge;
  std::vector<corpus::DatasetRow> rows;
  for (const auto& id : b.ids) {
    judge.plan["m"][id] = {5, "5", "3 changes, 3 hits", "5.0"};
    rows.push_back({id, "m", "Paint the lamp red."});
  }
  judge.overrides["judge:clarity:m:" + b.ids[1]] = "Clarity is fine, I would say 4 out of 5.";
  rows.push_back({"missing-pair", "m", "x"});
  providers::Client client(testsupport::test_provider(), judge.transport(), testsupport::no_sleep());
  const auto samples = evaluate_rows(b.store, rows, client);
  ASSERT_EQ(samples.size(), 4u);
  EXPECT_TRUE(samples[0].evaluated());
  EXPECT_FALSE(samples[1].evaluated());
  EXPECT_EQ(samples[1].dimension(Dimension::kClarity).error, ErrorCode::kUnparseable);
  EXPECT_TRUE(samples[1].dimension(Dimension::kAccuracy).validated.has_value());
  EXPECT_FALSE(samples[3].evaluated());
  EXPECT_EQ(samples[3].dimension(Dimension::kAccuracy).error, ErrorCode::kNotFound);

  const auto report = reporting::benchmark_report("d", samples);
  EXPECT_EQ(report.models[0].n_evaluated, 2u);
  EXPECT_EQ(report.models[0].n_unevaluated, 2u);
  EXPECT_EQ(report.models[0].mean_weighted, Decimal::parse("5"));

  EXPECT_THROW(evaluate_sample(b.store, rows[3], client), Error);
}

TEST(Evaluation, ClarityCeilingAppliedFromScan) {
  Bench b(1);
  PlanJudge judge;
  judge.plan["m"][b.ids[0]] = {5, "5", "3 changes, 3 hits", "5.0"};
  const std::vector<corpus::DatasetRow> rows = {{b.ids[0], "m", "Adjust the lamp slightly and remove it."}};
  providers::Client client(testsupport::test_provider(), judge.transport(), testsupport::no_sleep());
  const auto s = evaluate_rows(b.store, rows, client).at(0);
  const auto& clar = s.dimension(Dimension::kClarity);
  EXPECT_EQ(clar.forbidden_terms.size(), 3u);
  EXPECT_EQ(clar.validated->score, Decimal::parse("2"));
  ASSERT_EQ(clar.validated->log.size(), 1u);
  EXPECT_EQ(clar.validated->log[0].rule, "forbidden_term_ceiling");
  EXPECT_EQ(s.composite->weighted, Decimal::parse("4.4"));
}

TEST(Evaluation, ArchiveRoundTripsAndReportsAreByteStable) {
  Bench b(4);
  PlanJudge judge;
  std::vector<corpus::DatasetRow> rows;
  int i = 0;
  for (const auto& id : b.ids) {
    judge.plan["model/a"][id] = {3 + i % 3, "4", "3 changes, 2 hits", "3.5"};
    judge.plan["model-b"][id] = {4, "4.5", "3 changes, 2 hits +0.5", "4.1"};
    rows.push_back({id, "model/a", "Paint the lamp red."});
    rows.push_back({id, "model-b", "Paint the lamp crimson."});
    ++i;
  }
  providers::Client client(testsupport::test_provider(), judge.transport(), testsupport::no_sleep());
  const auto samples = evaluate_rows(b.store, rows, client);
  write_verdict_archive(b.dir / "verdicts", samples);
  const auto back = read_verdict_archive(b.dir / "verdicts");
  ASSERT_EQ(back.size(), samples.size());
  for (const auto& s : back) {
    ASSERT_TRUE(s.evaluated());
    const auto it = std::find_if(samples.begin(), samples.end(), [&](const SampleEvaluation& o) {
      return o.model == s.model && o.pair_id == s.pair_id;
    });
    ASSERT_NE(it, samples.end());
    EXPECT_EQ(s.composite->weighted, it->composite->weighted);
    EXPECT_EQ(to_json(s).dump(), to_json(*it).dump());
  }
  EXPECT_TRUE(std::filesystem::exists(b.dir / "verdicts" / "model_a"));

  const auto r1 = reporting::benchmark_report("d", read_verdict_archive(b.dir / "verdicts"));
  const auto r2 = reporting::benchmark_report("d", back);
  for (auto f : {reporting::Format::kMarkdown, reporting::Format::kCsv, reporting::Format::kJson}) {
    EXPECT_EQ(reporting::render(r1, f), reporting::render(r2, f));
  }
  EXPECT_THROW(read_verdict_archive(b.dir / "nope"), Error);
}

TEST(Reporting, FormatsEncodeIdenticalNumbers) {
  std::vector<SampleEvaluation> samples;
  const char* models[] = {"alpha", "beta, inc", "gamma"};
  for (int m = 0; m < 3; ++m) {
    for (int k = 0; k < 7; ++k) {
      SampleEvaluation s;
      s.pair_id = "p" + std::to_string(k);
      s.model = models[m];
      s.composite = composite(Decimal::from_int(1 + (k + m) % 5), Decimal::from_units((4 + k % 3) * 500'000'000LL),
                              Decimal::from_units((10 + 3 * k + m) * 100'000'000LL));
      samples.push_back(s);
    }
  }
  const auto r = reporting::benchmark_report("cross", samples);
  const auto j = json::parse(reporting::render(r, reporting::Format::kJson));
  const auto csv = reporting::render(r, reporting::Format::kCsv);
  const auto md = reporting::render(r, reporting::Format::kMarkdown);

  std::vector<std::vector<std::string>> csv_rows;
  {
    std::stringstream ss(csv);
    std::string line;
    std::getline(ss, line);
    EXPECT_EQ(line, "model,accuracy,completeness,clarity,weighted,composite_of_means,n_evaluated,n_unevaluated");
    while (std::getline(ss, line)) {
      std::vector<std::string> cells;
      // The quoted model name is the only field that may contain a comma.
      std::string rest = line;
      if (rest[0] == '"') {
        const auto close = rest.find('"', 1);
        cells.push_back(rest.substr(1, close - 1));
        rest = rest.substr(close + 2);
      } else {
        cells.push_back(rest.substr(0, rest.find(',')));
        rest = rest.substr(rest.find(',') + 1);
      }
      std::stringstream rs(rest);
      std::string c;
      while (std::getline(rs, c, ',')) cells.push_back(c);
      csv_rows.push_back(cells);
    }
  }
  ASSERT_EQ(csv_rows.size(), 3u);
  const char* keys[] = {"accuracy", "completeness", "clarity", "weighted", "composite_of_means"};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& row = j["models"][i];
    EXPECT_EQ(row["model"].get<std::string>(), csv_rows[i][0]);
    for (int k = 0; k < 5; ++k) {
      EXPECT_DOUBLE_EQ(row[keys[k]].get<double>(), std::stod(csv_rows[i][1 + k])) << keys[k];
      // Markdown shows the same text, possibly wrapped in a best / second-best mark.
      EXPECT_NE(md.find(csv_rows[i][1 + k]), std::string::npos) << csv_rows[i][1 + k];
    }
  }
  EXPECT_NE(md.find("beta, inc"), std::string::npos);
  EXPECT_NE(md.find("**"), std::string::npos);
  EXPECT_NE(md.find("<u>"), std::string::npos);
}

TEST(Reporting, EmptyInputsAreErrors) {
  EXPECT_THROW(reporting::benchmark_report("d", {}), Error);
  SampleEvaluation s;
  s.pair_id = "p";
  s.model = "m";
  const std::vector<SampleEvaluation> only_failed = {s};
  EXPECT_THROW(reporting::benchmark_report("d", only_failed), Error);
  EXPECT_EQ(reporting::parse_format("md"), reporting::Format::kMarkdown);
  EXPECT_FALSE(reporting::parse_format("xlsx"));
}
