#include <ctime>

#include "editfactory/error.hpp"
#include "editfactory/human_eval.hpp"
#include "editfactory/preference.hpp"
#include "editfactory/server.hpp"
#include "editfactory/util.hpp"

namespace editfactory::server {

using nlohmann::json;

namespace {

constexpr const char* kRefinements = "refinements";
constexpr const char* kObjectives[] = {"semantic_accuracy", "spatial_clarity", "fine_grained_detail"};

std::string require_text(const json& body, const char* field) {
  auto it = body.find(field);
  if (it == body.end() || !it->is_string() || trim(it->get<std::string>()).empty()) {
    raise(ErrorCode::kInvalidArgument, std::string("field '") + field + "' must be a non-empty string");
  }
  return it->get<std::string>();
}

void apply_refine(corpus::Store& store, const std::string& id, const std::string& annotator, const json& body) {
  const std::string text = require_text(body, "text");
  const json objectives = body.value("objectives", json());
  if (!objectives.is_object()) raise(ErrorCode::kInvalidArgument, "field 'objectives' must be an object");
  for (const char* key : kObjectives) {
    if (!objectives.contains(key) || !objectives.at(key).is_boolean()) {
      raise(ErrorCode::kInvalidArgument, std::string("objectives.") + key + " must be a boolean");
    }
  }
  tasks::complete_task(store, id, annotator, [&](const tasks::Task& t) {
    store.set_refined(t.pair_id,
                      corpus::make_instruction(text, {corpus::ProducerKind::kHuman, annotator}, store.now()));
    store.put(kRefinements, t.pair_id, {{"task_id", t.id}, {"annotator_id", annotator}, {"objectives", objectives}});
  });
}

void apply_preference(corpus::Store& store, const tasks::Task& task, const std::string& annotator, const json& body) {
  const json modes_json = body.value("failure_modes", json::array());
  if (!modes_json.is_array()) raise(ErrorCode::kInvalidArgument, "field 'failure_modes' must be an array");
  std::vector<preference::FailureMode> modes;
  for (const json& m : modes_json) {
    const auto mode = m.is_string() ? preference::parse_failure_mode(m.get<std::string>()) : std::nullopt;
    if (!mode) raise(ErrorCode::kInvalidArgument, "unknown failure mode " + m.dump());
    modes.push_back(*mode);
  }
  const std::string chosen =
      body.contains("chosen") ? require_text(body, "chosen") : task.payload.value("chosen", std::string());
  const std::string rejected = task.payload.value("rejected", std::string());
  const std::string note = body.value("note", std::string());
  tasks::complete_task(store, task.id, annotator, [&](const tasks::Task& t) {
    preference::build_pair(store, t.pair_id, rejected, chosen, modes, annotator, note);
  });
}

void apply_human_eval(corpus::Store& store, const std::string& id, const std::string& annotator, const json& body) {
  const std::string outcome = body.value("outcome", std::string());
  if (outcome != "correct" && outcome != "defect") {
    raise(ErrorCode::kInvalidArgument, "field 'outcome' must be \"correct\" or \"defect\"");
  }
  human_eval::DefectAnnotation a;
  try {
    a = body.get<human_eval::DefectAnnotation>();
  } catch (const json::exception& e) {
    raise(ErrorCode::kInvalidArgument, std::string("malformed annotation: ") + e.what());
  }
  if (outcome == "defect" && a.defects.empty()) raise(ErrorCode::kInvalidArgument, "a defect outcome needs defects");
  a.task_id = id;
  a.annotator_id = annotator;
  a.created_at.clear();
  human_eval::record_annotation(store, std::move(a));
}

}  // namespace

std::string format_utc(TimePoint t) {
  const std::time_t secs = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

TaskQueue::TaskQueue(corpus::Store& store, std::chrono::seconds lease, NowFn now)
    : store_(store), lease_(lease), now_(now ? std::move(now) : [] { return std::chrono::system_clock::now(); }) {}

std::optional<Claim> TaskQueue::claim_next(tasks::TaskKind kind, const std::string& annotator) {
  std::lock_guard lock(mu_);
  const TimePoint now = now_();
  for (const auto& [id, l] : leases_) {
    if (l.annotator != annotator || l.expires <= now) continue;
    auto task = tasks::get_task(store_, id);
    if (task && task->open && task->kind == kind) return Claim{*task, l};
  }
  for (tasks::Task& task : tasks::list_tasks(store_, kind)) {
    if (!task.open) continue;
    auto it = leases_.find(task.id);
    if (it != leases_.end() && it->second.expires > now) continue;
    Lease l{task.id, annotator, now + lease_};
    leases_[task.id] = l;
    return Claim{std::move(task), l};
  }
  return std::nullopt;
}

json TaskQueue::submit(const std::string& task_id, const std::string& annotator, const json& body) {
  const auto task = tasks::get_task(store_, task_id);
  if (!task) raise(ErrorCode::kNotFound, "unknown task " + task_id);
  if (!task->open) raise(ErrorCode::kTaskClosed, "task " + task_id + " is closed");
  {
    std::lock_guard lock(mu_);
    auto it = leases_.find(task_id);
    if (it == leases_.end() || it->second.annotator != annotator) {
      raise(ErrorCode::kNotClaimant, "task " + task_id + " is not claimed by " + annotator);
    }
    if (it->second.expires <= now_()) {
      leases_.erase(it);
      raise(ErrorCode::kLeaseExpired, "lease on task " + task_id + " expired");
    }
  }
  if (!body.is_object()) raise(ErrorCode::kInvalidArgument, "submission body must be a JSON object");
  switch (task->kind) {
    case tasks::TaskKind::kRefine: apply_refine(store_, task_id, annotator, body); break;
    case tasks::TaskKind::kPreference: apply_preference(store_, *task, annotator, body); break;
    case tasks::TaskKind::kHumanEval: apply_human_eval(store_, task_id, annotator, body); break;
  }
  release(task_id, annotator);
  return {{"status", "accepted"}, {"task_id", task_id}, {"kind", tasks::to_string(task->kind)}};
}

void TaskQueue::release(const std::string& task_id, const std::string& annotator) {
  std::lock_guard lock(mu_);
  auto it = leases_.find(task_id);
  if (it != leases_.end() && it->second.annotator == annotator) leases_.erase(it);
}

std::optional<Lease> TaskQueue::lease(const std::string& task_id) const {
  std::lock_guard lock(mu_);
  auto it = leases_.find(task_id);
  if (it == leases_.end()) return std::nullopt;
  return it->second;
}

}  // namespace editfactory::server
