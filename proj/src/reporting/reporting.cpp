#include "editfactory/reporting.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "editfactory/error.hpp"

namespace editfactory::reporting {

using nlohmann::json;

namespace {

constexpr int kDimPlaces = 2;
constexpr int kScorePlaces = 3;
constexpr int kRatePlaces = 2;

// A column's cells formatted for display, with best / second-best marks.
// `higher_better` picks the direction; ties share the mark.
std::vector<std::string> marked_column(const std::vector<Decimal>& values, int places, bool higher_better) {
  std::set<Decimal> distinct;
  for (Decimal v : values) distinct.insert(v.round(places));
  std::vector<Decimal> ranked(distinct.begin(), distinct.end());
  if (higher_better) std::reverse(ranked.begin(), ranked.end());
  std::vector<std::string> out;
  for (Decimal v : values) {
    const Decimal r = v.round(places);
    const std::string text = v.to_string(places);
    if (r == ranked[0]) out.push_back("**" + text + "**");
    else if (ranked.size() > 1 && r == ranked[1]) out.push_back("<u>" + text + "</u>");
    else out.push_back(text);
  }
  return out;
}

double presented(Decimal v, int places) { return v.round(places).to_double(); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string md_cell(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::optional<Format> parse_format(std::string_view s) {
  if (s == "md" || s == "markdown") return Format::kMarkdown;
  if (s == "csv") return Format::kCsv;
  if (s == "json") return Format::kJson;
  return std::nullopt;
}

BenchmarkReport benchmark_report(const std::string& dataset, std::span<const judge::SampleEvaluation> samples) {
  if (samples.empty()) raise(ErrorCode::kEmptyDataset, "no samples for dataset " + dataset);
  struct Acc {
    Decimal acc, comp, clar, weighted;
    std::size_t evaluated = 0, unevaluated = 0;
  };
  std::map<std::string, Acc> by_model;
  for (const auto& s : samples) {
    Acc& a = by_model[s.model];
    if (!s.evaluated()) {
      ++a.unevaluated;
      continue;
    }
    a.acc += s.composite->accuracy;
    a.comp += s.composite->completeness;
    a.clar += s.composite->clarity;
    a.weighted += s.composite->weighted;
    ++a.evaluated;
  }
  BenchmarkReport r;
  r.dataset = dataset;
  for (const auto& [model, a] : by_model) {
    if (a.evaluated == 0) raise(ErrorCode::kEmptyDataset, "model " + model + " has no evaluated sample");
    const auto n = static_cast<std::int64_t>(a.evaluated);
    ModelSummary m;
    m.model = model;
    m.mean_accuracy = a.acc.divided_by(n);
    m.mean_completeness = a.comp.divided_by(n);
    m.mean_clarity = a.clar.divided_by(n);
    m.mean_weighted = a.weighted.divided_by(n);
    m.composite_of_means = judge::weighted_sum(m.mean_accuracy, m.mean_completeness, m.mean_clarity);
    m.n_evaluated = a.evaluated;
    m.n_unevaluated = a.unevaluated;
    r.models.push_back(std::move(m));
  }
  return r;
}

HumanReport human_report(const corpus::Store& store, const std::string& dataset) {
  HumanReport r;
  r.dataset = dataset;
  for (auto& [model, rates] : human_eval::aggregate_rates(store, dataset)) r.models.push_back({model, rates});
  return r;
}

json to_json(const BenchmarkReport& r) {
  json models = json::array();
  for (const auto& m : r.models) {
    models.push_back({{"model", m.model},
                      {"accuracy", presented(m.mean_accuracy, kDimPlaces)},
                      {"completeness", presented(m.mean_completeness, kDimPlaces)},
                      {"clarity", presented(m.mean_clarity, kDimPlaces)},
                      {"weighted", presented(m.mean_weighted, kScorePlaces)},
                      {"composite_of_means", presented(m.composite_of_means, kScorePlaces)},
                      {"n_evaluated", m.n_evaluated},
                      {"n_unevaluated", m.n_unevaluated}});
  }
  return {{"kind", "objective"}, {"dataset", r.dataset}, {"models", std::move(models)}};
}

json to_json(const HumanReport& r) {
  json models = json::array();
  for (const auto& m : r.models) {
    json row = {{"model", m.model}, {"total", m.rates.total}};
    for (auto b : {human_eval::Bucket::kCorrect, human_eval::Bucket::kP0, human_eval::Bucket::kP1,
                   human_eval::Bucket::kP2}) {
      const int i = static_cast<int>(b);
      row[std::string(human_eval::to_string(b))] = presented(m.rates.percent[i], kRatePlaces);
      row[std::string(human_eval::to_string(b)) + "_count"] = m.rates.counts[i];
    }
    models.push_back(std::move(row));
  }
  return {{"kind", "human"}, {"dataset", r.dataset}, {"models", std::move(models)}};
}

std::string render(const BenchmarkReport& r, Format f) {
  if (f == Format::kJson) return to_json(r).dump(2) + "\n";
  std::string out;
  if (f == Format::kCsv) {
    out = "model,accuracy,completeness,clarity,weighted,composite_of_means,n_evaluated,n_unevaluated\n";
    for (const auto& m : r.models) {
      out += csv_field(m.model) + "," + m.mean_accuracy.to_string(kDimPlaces) + "," +
             m.mean_completeness.to_string(kDimPlaces) + "," + m.mean_clarity.to_string(kDimPlaces) + "," +
             m.mean_weighted.to_string(kScorePlaces) + "," + m.composite_of_means.to_string(kScorePlaces) + "," +
             std::to_string(m.n_evaluated) + "," + std::to_string(m.n_unevaluated) + "\n";
    }
    return out;
  }
  std::vector<Decimal> acc, comp, clar, s;
  for (const auto& m : r.models) {
    acc.push_back(m.mean_accuracy);
    comp.push_back(m.mean_completeness);
    clar.push_back(m.mean_clarity);
    s.push_back(m.mean_weighted);
  }
  const auto acc_c = marked_column(acc, kDimPlaces, true);
  const auto comp_c = marked_column(comp, kDimPlaces, true);
  const auto clar_c = marked_column(clar, kDimPlaces, true);
  const auto s_c = marked_column(s, kScorePlaces, true);
  out = "## Objective evaluation: " + md_cell(r.dataset) + "\n\n";
  out += "| Model | Acc. | Comp. | Clar. | S | S (means) | Evaluated | Unevaluated |\n";
  out += "|---|---:|---:|---:|---:|---:|---:|---:|\n";
  for (std::size_t i = 0; i < r.models.size(); ++i) {
    const auto& m = r.models[i];
    out += "| " + md_cell(m.model) + " | " + acc_c[i] + " | " + comp_c[i] + " | " + clar_c[i] + " | " + s_c[i] + " | " +
           m.composite_of_means.to_string(kScorePlaces) + " | " + std::to_string(m.n_evaluated) + " | " +
           std::to_string(m.n_unevaluated) + " |\n";
  }
  out += "\nS = 0.4 Acc + 0.4 Comp + 0.2 Clar, averaged over evaluated samples.\n";
  return out;
}

std::string render(const HumanReport& r, Format f) {
  if (f == Format::kJson) return to_json(r).dump(2) + "\n";
  using human_eval::Bucket;
  const Bucket order[] = {Bucket::kCorrect, Bucket::kP0, Bucket::kP1, Bucket::kP2};
  std::string out;
  if (f == Format::kCsv) {
    out = "model,correct,p0,p1,p2,total\n";
    for (const auto& m : r.models) {
      out += csv_field(m.model);
      for (Bucket b : order) out += "," + m.rates.percent[static_cast<int>(b)].to_string(kRatePlaces);
      out += "," + std::to_string(m.rates.total) + "\n";
    }
    return out;
  }
  std::vector<Decimal> correct, p0;
  for (const auto& m : r.models) {
    correct.push_back(m.rates.percent[static_cast<int>(Bucket::kCorrect)]);
    p0.push_back(m.rates.percent[static_cast<int>(Bucket::kP0)]);
  }
  const auto correct_c = marked_column(correct, kRatePlaces, true);
  const auto p0_c = marked_column(p0, kRatePlaces, false);
  out = "## Human evaluation: " + md_cell(r.dataset) + "\n\n";
  out += "| Model | Correct (%) | P0 (%) | P1 (%) | P2 (%) | Tasks |\n";
  out += "|---|---:|---:|---:|---:|---:|\n";
  for (std::size_t i = 0; i < r.models.size(); ++i) {
    const auto& m = r.models[i];
    out += "| " + md_cell(m.model) + " | " + correct_c[i] + " | " + p0_c[i] + " | " +
           m.rates.percent[static_cast<int>(Bucket::kP1)].to_string(kRatePlaces) + " | " +
           m.rates.percent[static_cast<int>(Bucket::kP2)].to_string(kRatePlaces) + " | " +
           std::to_string(m.rates.total) + " |\n";
  }
  return out;
}

}  // namespace editfactory::reporting
