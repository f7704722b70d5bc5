#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "editfactory/store.hpp"

namespace editfactory::tasks {

enum class TaskKind { kRefine, kPreference, kHumanEval };

// "refine", "preference", "human_eval".
std::string_view to_string(TaskKind k);
std::optional<TaskKind> parse_task_kind(std::string_view s);

// Unit of annotator work. Definitions live in the store under "tasks";
// a task closes exactly once, when its result is accepted.
struct Task {
  std::string id;
  TaskKind kind = TaskKind::kRefine;
  std::string pair_id;
  std::string dataset;
  nlohmann::json payload = nlohmann::json::object();
  bool open = true;
  std::string created_at;
  std::string closed_at;
  std::string closed_by;
};

void to_json(nlohmann::json& j, const Task& t);
void from_json(const nlohmann::json& j, Task& t);

// Deterministic id: "<kind>-" + 16 hex digits of sha256 over the parts.
std::string make_task_id(TaskKind kind, const std::vector<std::string>& parts);

// Returns false when a task with this id already exists.
bool create_task(corpus::Store& store, Task task);
std::optional<Task> get_task(const corpus::Store& store, const std::string& id);
// Ordered by id; optionally restricted to one kind and/or dataset.
std::vector<Task> list_tasks(const corpus::Store& store, std::optional<TaskKind> kind = std::nullopt,
                             const std::string& dataset = {});

// Runs `accept` then closes the task, as one step with respect to other
// completions: of two racing submissions exactly one runs. `accept` may throw
// to reject the result, leaving the task open. Throws kNotFound, kTaskClosed.
void complete_task(corpus::Store& store, const std::string& id, const std::string& annotator,
                   const std::function<void(const Task&)>& accept);

// Refine tasks for every Filtered triplet; preference tasks for every
// (Refined triplet, differing model output). Returns the number created.
std::size_t create_refine_tasks(corpus::Store& store);
std::size_t create_preference_tasks(corpus::Store& store);

}  // namespace editfactory::tasks
