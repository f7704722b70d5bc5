#include "editfactory/evaluation.hpp"

#include <algorithm>

#include "core/pair_images.hpp"
#include "editfactory/util.hpp"

namespace editfactory::judge {

using nlohmann::json;

namespace {

int index_of(Dimension d) { return static_cast<int>(d); }

DimensionResult failed(Dimension d, ErrorCode code, std::string message) {
  DimensionResult r;
  r.dimension = d;
  r.error = code;
  r.error_message = std::move(message);
  return r;
}

void finish(SampleEvaluation& s) {
  for (const DimensionResult& r : s.dimensions) {
    if (!r.validated) return;
  }
  s.composite = composite(s.dimensions[0].validated->score, s.dimensions[1].validated->score,
                          s.dimensions[2].validated->score);
}

json clamp_json(const ClampEvent& c) {
  return {{"rule", c.rule},
          {"before", c.before.to_canonical()},
          {"after", c.after.to_canonical()},
          {"detail", c.detail},
          {"inconsistency", c.inconsistency}};
}

json dimension_json(const DimensionResult& r) {
  json j = {{"prompt_hash", r.prompt_hash}, {"raw", r.raw}};
  if (r.verdict) {
    json v = {{"score", r.verdict->score.to_canonical()},
              {"reasoning", r.verdict->reasoning},
              {"lenient", r.verdict->lenient}};
    if (r.verdict->hits) {
      v["hits"] = {{"hits", r.verdict->hits->hits.to_canonical()}, {"total", r.verdict->hits->total}};
    }
    if (r.verdict->hallucination) v["hallucination"] = *r.verdict->hallucination;
    j["verdict"] = std::move(v);
  }
  if (r.dimension == Dimension::kClarity) {
    json terms = json::array();
    for (const ForbiddenTermHit& h : r.forbidden_terms) {
      terms.push_back({{"term", h.term}, {"class", to_string(h.term_class)}, {"begin", h.begin}, {"end", h.end}});
    }
    j["forbidden_terms"] = std::move(terms);
  }
  if (r.validated) {
    j["validated"] = r.validated->score.to_canonical();
    json clamps = json::array();
    for (const ClampEvent& c : r.validated->log) clamps.push_back(clamp_json(c));
    j["clamps"] = std::move(clamps);
  }
  if (r.error) j["error"] = {{"code", error_code_name(*r.error)}, {"message", r.error_message}};
  return j;
}

DimensionResult dimension_from_json(Dimension d, const json& j) {
  DimensionResult r;
  r.dimension = d;
  r.prompt_hash = j.value("prompt_hash", "");
  r.raw = j.value("raw", "");
  if (auto v = j.find("verdict"); v != j.end()) {
    JudgeVerdict verdict;
    verdict.dimension = d;
    verdict.score = Decimal::parse(v->at("score").get<std::string>());
    verdict.reasoning = v->value("reasoning", "");
    verdict.lenient = v->value("lenient", false);
    verdict.raw = r.raw;
    if (auto h = v->find("hits"); h != v->end()) {
      verdict.hits = CoverageHits{Decimal::parse(h->at("hits").get<std::string>()), h->at("total").get<int>()};
    }
    if (auto h = v->find("hallucination"); h != v->end()) verdict.hallucination = h->get<bool>();
    r.verdict = std::move(verdict);
  }
  if (auto t = j.find("forbidden_terms"); t != j.end()) {
    for (const json& h : *t) {
      ForbiddenTermHit hit;
      hit.term = h.at("term").get<std::string>();
      const std::string cls = h.value("class", "");
      for (TermClass c : {TermClass::kVagueVerb, TermClass::kVagueDegree, TermClass::kVagueRef}) {
        if (to_string(c) == cls) hit.term_class = c;
      }
      hit.begin = h.at("begin").get<std::size_t>();
      hit.end = h.at("end").get<std::size_t>();
      r.forbidden_terms.push_back(std::move(hit));
    }
  }
  if (auto v = j.find("validated"); v != j.end()) {
    ValidatedScore vs{Decimal::parse(v->get<std::string>()), {}};
    for (const json& c : j.value("clamps", json::array())) {
      vs.log.push_back({c.at("rule").get<std::string>(), Decimal::parse(c.at("before").get<std::string>()),
                        Decimal::parse(c.at("after").get<std::string>()), c.value("detail", ""),
                        c.value("inconsistency", false)});
    }
    r.validated = std::move(vs);
  }
  if (auto e = j.find("error"); e != j.end()) {
    r.error = parse_error_code(e->value("code", "")).value_or(ErrorCode::kUnparseable);
    r.error_message = e->value("message", "");
  }
  return r;
}

}  // namespace

json to_json(const SampleEvaluation& s) {
  json dims = json::object();
  for (const DimensionResult& r : s.dimensions) dims[std::string(to_string(r.dimension))] = dimension_json(r);
  json j = {{"pair_id", s.pair_id},
            {"model", s.model},
            {"instruction", s.instruction},
            {"prompt_version", kPromptVersion},
            {"status", s.evaluated() ? "evaluated" : "unevaluated"},
            {"dimensions", std::move(dims)}};
  if (s.composite) {
    j["composite"] = {{"accuracy", s.composite->accuracy.to_canonical()},
                      {"completeness", s.composite->completeness.to_canonical()},
                      {"clarity", s.composite->clarity.to_canonical()},
                      {"weighted", s.composite->weighted.to_canonical()}};
  }
  return j;
}

SampleEvaluation sample_from_json(const json& j) {
  SampleEvaluation s;
  s.pair_id = j.at("pair_id").get<std::string>();
  s.model = j.at("model").get<std::string>();
  s.instruction = j.value("instruction", "");
  const json& dims = j.at("dimensions");
  for (Dimension d : kAllDimensions) {
    const std::string name(to_string(d));
    s.dimensions[index_of(d)] = dims.contains(name) ? dimension_from_json(d, dims.at(name))
                                                    : failed(d, ErrorCode::kUnparseable, "missing from archive");
  }
  finish(s);
  return s;
}

providers::ChatRequest build_judge_request(const corpus::Store& store, const corpus::ImagePair& pair, Dimension d,
                                           const corpus::GroundTruth& gt, const corpus::DatasetRow& row) {
  providers::ChatRequest req;
  req.images = detail::pair_images(store, pair);
  req.prompt = render_prompt(d, gt, row.instruction, row.model);
  req.temperature = 0.0;
  req.seed = 0;
  req.tag = "judge:" + std::string(to_string(d)) + ":" + row.model + ":" + row.pair_id;
  return req;
}

DimensionResult judge_response(Dimension d, std::string_view raw, std::string_view instruction) {
  DimensionResult r;
  r.dimension = d;
  r.raw = std::string(raw);
  if (d == Dimension::kClarity) r.forbidden_terms = scan_forbidden_terms(instruction);
  try {
    r.verdict = parse_verdict(d, raw);
    r.validated = enforce_constraints(d, *r.verdict, r.forbidden_terms);
  } catch (const Error& e) {
    r.error = e.code();
    r.error_message = e.what();
  }
  return r;
}

SampleEvaluation evaluate_sample(const corpus::Store& store, const corpus::DatasetRow& row,
                                 const providers::Client& judge) {
  if (!store.has_pair(row.pair_id)) raise(ErrorCode::kNotFound, "unknown pair " + row.pair_id);
  const auto gt = store.ground_truth(row.pair_id);
  if (!gt) raise(ErrorCode::kNotFound, "no ground truth for pair " + row.pair_id);
  if (gt->primary_changes.empty()) raise(ErrorCode::kEmptyGroundTruth, "ground truth has no primary changes");
  return evaluate_rows(store, std::span(&row, 1), judge).front();
}

std::vector<SampleEvaluation> evaluate_rows(const corpus::Store& store, std::span<const corpus::DatasetRow> rows,
                                            const providers::Client& judge) {
  std::vector<SampleEvaluation> out(rows.size());
  std::vector<providers::ChatRequest> reqs;
  std::vector<std::pair<std::size_t, Dimension>> owners;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const corpus::DatasetRow& row = rows[i];
    SampleEvaluation& s = out[i];
    s.pair_id = row.pair_id;
    s.model = row.model;
    s.instruction = row.instruction;
    for (Dimension d : kAllDimensions) s.dimensions[index_of(d)].dimension = d;

    const auto pair = store.pair(row.pair_id);
    const auto gt = store.ground_truth(row.pair_id);
    std::optional<std::pair<ErrorCode, std::string>> problem;
    if (!pair) problem = {ErrorCode::kNotFound, "unknown pair " + row.pair_id};
    else if (!gt) problem = {ErrorCode::kNotFound, "no ground truth for pair " + row.pair_id};
    else if (gt->primary_changes.empty()) problem = {ErrorCode::kEmptyGroundTruth, "ground truth has no primary changes"};
    if (problem) {
      for (Dimension d : kAllDimensions) s.dimensions[index_of(d)] = failed(d, problem->first, problem->second);
      continue;
    }
    for (Dimension d : kAllDimensions) {
      reqs.push_back(build_judge_request(store, *pair, d, *gt, row));
      s.dimensions[index_of(d)].prompt_hash = providers::request_hash(judge.config(), reqs.back());
      owners.emplace_back(i, d);
    }
  }

  const auto results = judge.batch_complete(reqs);
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto [i, d] = owners[k];
    DimensionResult& slot = out[i].dimensions[index_of(d)];
    const std::string hash = slot.prompt_hash;
    if (results[k].ok()) {
      slot = judge_response(d, results[k].completion().text, out[i].instruction);
    } else {
      slot = failed(d, results[k].error().code, results[k].error().message);
    }
    slot.prompt_hash = hash;
  }
  for (SampleEvaluation& s : out) finish(s);
  return out;
}

void write_verdict_archive(const std::filesystem::path& dir, std::span<const SampleEvaluation> samples) {
  for (const SampleEvaluation& s : samples) {
    const auto path = dir / sanitize_filename(s.model) / (sanitize_filename(s.pair_id) + ".json");
    std::filesystem::create_directories(path.parent_path());
    write_file_atomic(path, to_json(s).dump(2) + "\n");
  }
}

std::vector<SampleEvaluation> read_verdict_archive(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) raise(ErrorCode::kNotFound, "no verdict archive at " + dir.string());
  std::vector<SampleEvaluation> out;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    json j;
    try {
      j = json::parse(read_file_text(entry.path()));
    } catch (const json::exception& e) {
      raise(ErrorCode::kIo, entry.path().string() + ": " + e.what());
    }
    out.push_back(sample_from_json(j));
  }
  std::sort(out.begin(), out.end(), [](const SampleEvaluation& a, const SampleEvaluation& b) {
    return std::tie(a.model, a.pair_id) < std::tie(b.model, b.pair_id);
  });
  return out;
}

}  // namespace editfactory::judge
