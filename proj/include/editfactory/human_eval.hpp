#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "editfactory/dataset.hpp"
#include "editfactory/decimal.hpp"
#include "editfactory/store.hpp"
#include "editfactory/tasks.hpp"

namespace editfactory::human_eval {

enum class Severity { kP0 = 0, kP1 = 1, kP2 = 2 };

std::string_view to_string(Severity s);
std::optional<Severity> parse_severity(std::string_view s);

struct ChecklistCategory {
  int id = 0;
  std::string title;
  std::vector<Severity> severity_options;
  std::string description;
  std::string examples;
};

// Versioned annotation checklist, loaded from data rather than code.
class Checklist {
 public:
  static Checklist from_json(const nlohmann::json& j);
  // The shipped v1 checklist.
  static const Checklist& builtin();

  const std::string& version() const { return version_; }
  const std::vector<ChecklistCategory>& categories() const { return categories_; }
  const ChecklistCategory* find(int id) const;
  bool allows(int category_id, Severity s) const;
  const nlohmann::json& raw() const { return raw_; }

 private:
  std::string version_;
  std::vector<ChecklistCategory> categories_;
  nlohmann::json raw_;
};

struct Defect {
  Severity severity = Severity::kP0;
  int category_id = 0;
  std::string note;
};

// An empty defect list is the Correct outcome. P1/P2 defects are only
// accepted with attest_no_p0 set, after the annotator has ruled out P0.
struct DefectAnnotation {
  std::string task_id;
  std::string annotator_id;
  std::vector<Defect> defects;
  bool attest_no_p0 = false;
  std::string created_at;

  bool correct() const { return defects.empty(); }
};

void to_json(nlohmann::json& j, const DefectAnnotation& a);
void from_json(const nlohmann::json& j, DefectAnnotation& a);

enum class Bucket { kCorrect = 0, kP0 = 1, kP1 = 2, kP2 = 3 };

std::string_view to_string(Bucket b);
// Worst severity present, or Correct.
Bucket bucket_of(const DefectAnnotation& a);

// One human_eval task per dataset row; the payload carries model and
// instruction. Idempotent; returns the number created.
std::size_t create_tasks(corpus::Store& store, const std::string& dataset, std::span<const corpus::DatasetRow> rows);

// Validates against the checklist and the severity hierarchy, then stores the
// annotation and closes the task. Lower-severity defects alongside the worst
// one are dropped; the stored record carries a single severity level.
// Throws kNotFound, kTaskClosed, kDuplicateAnnotation,
// kIllegalSeverityForCategory, kHierarchyViolation.
DefectAnnotation record_annotation(corpus::Store& store, DefectAnnotation annotation,
                                   const Checklist& checklist = Checklist::builtin());

std::optional<DefectAnnotation> annotation_for(const corpus::Store& store, const std::string& task_id);

struct Rates {
  std::array<std::size_t, 4> counts{};  // indexed by Bucket
  std::array<Decimal, 4> percent{};     // two decimals, summing to exactly 100.00
  std::size_t total = 0;
};

// Largest-remainder reconciliation in hundredths of a percent; ties go to
// the earlier bucket (Correct, P0, P1, P2). Throws kEmptyDataset for none.
Rates rates_from_buckets(std::span<const Bucket> buckets);

// Per-model rates for a dataset's human_eval tasks. Throws
// kIncompleteDataset naming the unannotated tasks, kEmptyDataset.
std::map<std::string, Rates> aggregate_rates(const corpus::Store& store, const std::string& dataset);

// Annotation log for a dataset as JSONL, ordered by task id.
std::string export_annotations_jsonl(const corpus::Store& store, const std::string& dataset);

}  // namespace editfactory::human_eval
