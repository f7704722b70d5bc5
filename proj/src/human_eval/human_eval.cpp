#include "editfactory/human_eval.hpp"

#include <algorithm>

#include "core/assets.hpp"
#include "editfactory/error.hpp"

namespace editfactory::human_eval {

using nlohmann::json;

namespace {

constexpr const char* kAnnotations = "annotations";

}  // namespace

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::kP0: return "P0";
    case Severity::kP1: return "P1";
    case Severity::kP2: return "P2";
  }
  return "unknown";
}

std::optional<Severity> parse_severity(std::string_view s) {
  for (Severity v : {Severity::kP0, Severity::kP1, Severity::kP2}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::string_view to_string(Bucket b) {
  switch (b) {
    case Bucket::kCorrect: return "correct";
    case Bucket::kP0: return "p0";
    case Bucket::kP1: return "p1";
    case Bucket::kP2: return "p2";
  }
  return "unknown";
}

Checklist Checklist::from_json(const json& j) {
  Checklist c;
  c.raw_ = j;
  c.version_ = j.at("version").get<std::string>();
  for (const json& cat : j.at("categories")) {
    ChecklistCategory cc;
    cc.id = cat.at("id").get<int>();
    cc.title = cat.at("title").get<std::string>();
    cc.description = cat.value("description", "");
    cc.examples = cat.value("examples", "");
    for (const json& s : cat.at("severity_options")) {
      const auto sev = parse_severity(s.get<std::string>());
      if (!sev) raise(ErrorCode::kInvalidArgument, "checklist: unknown severity " + s.dump());
      cc.severity_options.push_back(*sev);
    }
    if (cc.severity_options.empty()) raise(ErrorCode::kInvalidArgument, "checklist: category without severities");
    c.categories_.push_back(std::move(cc));
  }
  return c;
}

const Checklist& Checklist::builtin() {
  static const Checklist c = from_json(json::parse(assets::checklist_v1));
  return c;
}

const ChecklistCategory* Checklist::find(int id) const {
  for (const auto& c : categories_) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

bool Checklist::allows(int category_id, Severity s) const {
  const auto* c = find(category_id);
  return c && std::find(c->severity_options.begin(), c->severity_options.end(), s) != c->severity_options.end();
}

void to_json(json& j, const DefectAnnotation& a) {
  json defects = json::array();
  for (const Defect& d : a.defects) {
    defects.push_back({{"severity", to_string(d.severity)}, {"category_id", d.category_id}, {"note", d.note}});
  }
  j = json{{"task_id", a.task_id},
           {"annotator_id", a.annotator_id},
           {"outcome", a.correct() ? "correct" : "defect"},
           {"defects", std::move(defects)},
           {"attest_no_p0", a.attest_no_p0},
           {"created_at", a.created_at}};
}

void from_json(const json& j, DefectAnnotation& a) {
  a.task_id = j.value("task_id", "");
  a.annotator_id = j.value("annotator_id", "");
  a.attest_no_p0 = j.value("attest_no_p0", false);
  a.created_at = j.value("created_at", "");
  a.defects.clear();
  for (const json& d : j.value("defects", json::array())) {
    const auto sev = parse_severity(d.at("severity").get<std::string>());
    if (!sev) raise(ErrorCode::kInvalidArgument, "unknown severity " + d.at("severity").dump());
    a.defects.push_back({*sev, d.at("category_id").get<int>(), d.value("note", "")});
  }
  if (j.value("outcome", "") == "correct" && !a.defects.empty()) {
    raise(ErrorCode::kInvalidArgument, "outcome 'correct' cannot carry defects");
  }
}

Bucket bucket_of(const DefectAnnotation& a) {
  if (a.defects.empty()) return Bucket::kCorrect;
  Severity worst = Severity::kP2;
  for (const Defect& d : a.defects) worst = std::min(worst, d.severity);
  return static_cast<Bucket>(static_cast<int>(worst) + 1);
}

std::size_t create_tasks(corpus::Store& store, const std::string& dataset, std::span<const corpus::DatasetRow> rows) {
  std::size_t created = 0;
  for (const corpus::DatasetRow& row : rows) {
    tasks::Task t;
    t.id = tasks::make_task_id(tasks::TaskKind::kHumanEval, {dataset, row.model, row.pair_id});
    t.kind = tasks::TaskKind::kHumanEval;
    t.pair_id = row.pair_id;
    t.dataset = dataset;
    t.payload = {{"model", row.model}, {"instruction", row.instruction}};
    if (tasks::create_task(store, t)) ++created;
  }
  return created;
}

DefectAnnotation record_annotation(corpus::Store& store, DefectAnnotation a, const Checklist& checklist) {
  for (const Defect& d : a.defects) {
    if (!checklist.allows(d.category_id, d.severity)) {
      raise(ErrorCode::kIllegalSeverityForCategory, std::string(to_string(d.severity)) + " is not a legal severity for category " +
                                                        std::to_string(d.category_id));
    }
  }
  const bool has_p0 = std::any_of(a.defects.begin(), a.defects.end(), [](const Defect& d) { return d.severity == Severity::kP0; });
  const bool has_lower = std::any_of(a.defects.begin(), a.defects.end(), [](const Defect& d) { return d.severity != Severity::kP0; });
  if (has_p0 && has_lower) {
    raise(ErrorCode::kHierarchyViolation, "a P0 outcome excludes P1/P2 marks on the same instruction");
  }
  if (has_lower && !a.attest_no_p0) {
    raise(ErrorCode::kHierarchyViolation, "P1/P2 defects require attesting that no P0 error exists");
  }
  if (!a.defects.empty()) {
    const Severity worst = static_cast<Severity>(static_cast<int>(bucket_of(a)) - 1);
    std::erase_if(a.defects, [&](const Defect& d) { return d.severity != worst; });
  }

  const auto existing = annotation_for(store, a.task_id);
  if (existing && existing->annotator_id == a.annotator_id) {
    raise(ErrorCode::kDuplicateAnnotation, "annotator " + a.annotator_id + " already annotated task " + a.task_id);
  }
  tasks::complete_task(store, a.task_id, a.annotator_id, [&](const tasks::Task& task) {
    if (task.kind != tasks::TaskKind::kHumanEval) {
      raise(ErrorCode::kInvalidArgument, "task " + task.id + " is not a human_eval task");
    }
    if (store.get(kAnnotations, task.id)) {
      raise(ErrorCode::kDuplicateAnnotation, "task " + task.id + " already has an annotation");
    }
    if (a.created_at.empty()) a.created_at = store.now();
    store.put(kAnnotations, task.id, a);
  });
  return a;
}

std::optional<DefectAnnotation> annotation_for(const corpus::Store& store, const std::string& task_id) {
  auto j = store.get(kAnnotations, task_id);
  if (!j) return std::nullopt;
  return j->get<DefectAnnotation>();
}

Rates rates_from_buckets(std::span<const Bucket> buckets) {
  if (buckets.empty()) raise(ErrorCode::kEmptyDataset, "no annotated tasks");
  Rates r;
  r.total = buckets.size();
  for (Bucket b : buckets) ++r.counts[static_cast<int>(b)];
  // Work in hundredths of a percent: exact share is counts*10000/total.
  std::array<std::int64_t, 4> units{};
  std::array<std::int64_t, 4> remainder{};
  std::int64_t assigned = 0;
  const auto n = static_cast<std::int64_t>(r.total);
  for (int i = 0; i < 4; ++i) {
    const std::int64_t scaled = static_cast<std::int64_t>(r.counts[i]) * 10000;
    units[i] = scaled / n;
    remainder[i] = scaled % n;
    assigned += units[i];
  }
  std::array<int, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainder[a] > remainder[b]; });
  for (int k = 0; assigned < 10000; ++k, ++assigned) ++units[order[k % 4]];
  for (int i = 0; i < 4; ++i) r.percent[i] = Decimal::from_units(units[i] * (Decimal::kScale / 100));
  return r;
}

std::map<std::string, Rates> aggregate_rates(const corpus::Store& store, const std::string& dataset) {
  const auto all = tasks::list_tasks(store, tasks::TaskKind::kHumanEval, dataset);
  if (all.empty()) raise(ErrorCode::kEmptyDataset, "no human_eval tasks for dataset " + dataset);
  std::map<std::string, std::vector<Bucket>> by_model;
  std::vector<std::string> missing;
  for (const tasks::Task& t : all) {
    const auto a = annotation_for(store, t.id);
    if (!a) {
      missing.push_back(t.id);
      continue;
    }
    by_model[t.payload.value("model", "")].push_back(bucket_of(*a));
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
    raise(ErrorCode::kIncompleteDataset, std::to_string(missing.size()) + " unannotated task(s): " + list);
  }
  std::map<std::string, Rates> out;
  for (const auto& [model, buckets] : by_model) out[model] = rates_from_buckets(buckets);
  return out;
}

std::string export_annotations_jsonl(const corpus::Store& store, const std::string& dataset) {
  std::string out;
  for (const tasks::Task& t : tasks::list_tasks(store, tasks::TaskKind::kHumanEval, dataset)) {
    const auto a = annotation_for(store, t.id);
    if (!a) continue;
    json row = *a;
    row["pair_id"] = t.pair_id;
    row["model"] = t.payload.value("model", "");
    row["bucket"] = to_string(bucket_of(*a));
    out += row.dump() + "\n";
  }
  return out;
}

}  // namespace editfactory::human_eval
