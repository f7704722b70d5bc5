#include "editfactory/tasks.hpp"

#include <mutex>

#include "editfactory/error.hpp"
#include "editfactory/util.hpp"

namespace editfactory::tasks {

using nlohmann::json;

namespace {

constexpr const char* kTasks = "tasks";

// Serializes every check-then-close sequence in the process.
std::mutex& completion_mutex() {
  static std::mutex mu;
  return mu;
}

}  // namespace

std::string_view to_string(TaskKind k) {
  switch (k) {
    case TaskKind::kRefine: return "refine";
    case TaskKind::kPreference: return "preference";
    case TaskKind::kHumanEval: return "human_eval";
  }
  return "unknown";
}

std::optional<TaskKind> parse_task_kind(std::string_view s) {
  for (TaskKind k : {TaskKind::kRefine, TaskKind::kPreference, TaskKind::kHumanEval}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

void to_json(json& j, const Task& t) {
  j = json{{"id", t.id},
           {"kind", to_string(t.kind)},
           {"pair_id", t.pair_id},
           {"dataset", t.dataset},
           {"payload", t.payload},
           {"open", t.open},
           {"created_at", t.created_at},
           {"closed_at", t.closed_at},
           {"closed_by", t.closed_by}};
}

void from_json(const json& j, Task& t) {
  t.id = j.at("id").get<std::string>();
  const auto kind = parse_task_kind(j.at("kind").get<std::string>());
  if (!kind) raise(ErrorCode::kInvalidArgument, "unknown task kind " + j.at("kind").dump());
  t.kind = *kind;
  t.pair_id = j.value("pair_id", "");
  t.dataset = j.value("dataset", "");
  t.payload = j.value("payload", json::object());
  t.open = j.value("open", true);
  t.created_at = j.value("created_at", "");
  t.closed_at = j.value("closed_at", "");
  t.closed_by = j.value("closed_by", "");
}

std::string make_task_id(TaskKind kind, const std::vector<std::string>& parts) {
  std::string material(to_string(kind));
  for (const std::string& p : parts) {
    material += '\x1f';
    material += p;
  }
  return std::string(to_string(kind)) + "-" + sha256_hex(material).substr(0, 16);
}

bool create_task(corpus::Store& store, Task task) {
  std::lock_guard lock(completion_mutex());
  if (store.get(kTasks, task.id)) return false;
  if (task.created_at.empty()) task.created_at = store.now();
  store.put(kTasks, task.id, task);
  return true;
}

std::optional<Task> get_task(const corpus::Store& store, const std::string& id) {
  auto j = store.get(kTasks, id);
  if (!j) return std::nullopt;
  return j->get<Task>();
}

std::vector<Task> list_tasks(const corpus::Store& store, std::optional<TaskKind> kind, const std::string& dataset) {
  std::vector<Task> out;
  for (const auto& [id, j] : store.list(kTasks)) {
    Task t = j.get<Task>();
    if (kind && t.kind != *kind) continue;
    if (!dataset.empty() && t.dataset != dataset) continue;
    out.push_back(std::move(t));
  }
  return out;
}

void complete_task(corpus::Store& store, const std::string& id, const std::string& annotator,
                   const std::function<void(const Task&)>& accept) {
  std::lock_guard lock(completion_mutex());
  auto task = get_task(store, id);
  if (!task) raise(ErrorCode::kNotFound, "unknown task " + id);
  if (!task->open) raise(ErrorCode::kTaskClosed, "task " + id + " is closed");
  accept(*task);
  task->open = false;
  task->closed_at = store.now();
  task->closed_by = annotator;
  store.put(kTasks, id, *task);
}

std::size_t create_refine_tasks(corpus::Store& store) {
  std::size_t created = 0;
  for (const corpus::TripletRecord& rec : store.triplets()) {
    if (rec.status != corpus::TripletStatus::kFiltered) continue;
    Task t;
    t.id = make_task_id(TaskKind::kRefine, {rec.pair_id});
    t.kind = TaskKind::kRefine;
    t.pair_id = rec.pair_id;
    t.payload = {{"draft", rec.draft.text}};
    if (create_task(store, t)) ++created;
    store.set_status(rec.pair_id, corpus::TripletStatus::kRefinementPending);
  }
  return created;
}

std::size_t create_preference_tasks(corpus::Store& store) {
  std::size_t created = 0;
  for (const corpus::TripletRecord& rec : store.triplets()) {
    if (rec.status != corpus::TripletStatus::kRefined || !rec.refined) continue;
    for (const corpus::Instruction& out : store.model_outputs(rec.pair_id)) {
      if (normalize_whitespace(out.text) == normalize_whitespace(rec.refined->text)) continue;
      Task t;
      t.id = make_task_id(TaskKind::kPreference, {rec.pair_id, out.producer.id, out.text});
      t.kind = TaskKind::kPreference;
      t.pair_id = rec.pair_id;
      t.payload = {{"chosen", rec.refined->text}, {"rejected", out.text}, {"rejected_model", out.producer.id}};
      if (create_task(store, t)) ++created;
    }
  }
  return created;
}

}  // namespace editfactory::tasks
