#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace constellation {

using Json = nlohmann::json;
using TaskId = std::string;
using EdgeId = std::string;
using DeviceId = std::string;

enum class TaskStatus { Pending, Running, Completed, Failed };

constexpr bool is_terminal(TaskStatus s) noexcept {
    return s == TaskStatus::Completed || s == TaskStatus::Failed;
}

// PENDING->RUNNING, RUNNING->{COMPLETED,FAILED}, PENDING->FAILED. Nothing leaves a
// terminal status.
bool is_legal_transition(TaskStatus from, TaskStatus to) noexcept;

enum class FailureReason {
    ExecutionError,
    DependencyUnsatisfied,
    AgentDisconnected,
    Timeout,
    PlannerCancelled,
};

struct DependencyType {
    enum class Kind { Unconditional, SuccessOnly, Conditional };

    Kind kind = Kind::Unconditional;
    std::string condition_id;  // only meaningful for Conditional

    static DependencyType unconditional() {
        return {};
    }
    static DependencyType success_only() {
        return {Kind::SuccessOnly, {}};
    }
    static DependencyType conditional(std::string id) {
        return {Kind::Conditional, std::move(id)};
    }

    bool operator==(const DependencyType&) const = default;
};

// Fields a planner supplies when creating a task.
struct TaskSpec {
    TaskId id;
    std::string name;
    std::string description;
    std::vector<std::string> tips;
    DeviceId device;

    bool operator==(const TaskSpec&) const = default;
};

struct TaskStar {
    TaskId id;
    std::string name;
    std::string description;
    std::vector<std::string> tips;
    DeviceId device;
    TaskStatus status = TaskStatus::Pending;
    std::optional<Json> result;
    std::optional<FailureReason> failure_reason;

    static TaskStar from_spec(const TaskSpec& spec);
    TaskSpec spec() const;

    bool operator==(const TaskStar&) const = default;
};

struct TaskStarLine {
    EdgeId id;
    TaskId from_task;
    TaskId to_task;
    DependencyType dep_type;
    std::string description;

    bool operator==(const TaskStarLine&) const = default;
};

// Partial update for a task. `status` and `result` exist so that a planner
// payload touching them can be represented and rejected with IllegalField.
struct TaskPatch {
    std::optional<std::string> name;
    std::optional<std::string> description;
    std::optional<DeviceId> device;
    std::optional<std::vector<std::string>> tips;
    std::optional<TaskStatus> status;
    std::optional<Json> result;

    bool empty() const;
    bool operator==(const TaskPatch&) const = default;
};

struct DependencyPatch {
    std::optional<DependencyType> dep_type;
    std::optional<std::string> description;

    bool operator==(const DependencyPatch&) const = default;
};

std::string_view to_string(TaskStatus s);
std::string_view to_string(FailureReason r);
std::string_view to_string(DependencyType::Kind k);

std::optional<TaskStatus> parse_task_status(std::string_view s);
std::optional<FailureReason> parse_failure_reason(std::string_view s);
std::optional<DependencyType::Kind> parse_dependency_kind(std::string_view s);

}  // namespace constellation
