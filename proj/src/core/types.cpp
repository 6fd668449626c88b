#include "constellation/core/types.hpp"

namespace constellation {

bool is_legal_transition(TaskStatus from, TaskStatus to) noexcept {
    switch (from) {
        case TaskStatus::Pending:
            return to == TaskStatus::Running || to == TaskStatus::Failed;
        case TaskStatus::Running:
            return to == TaskStatus::Completed || to == TaskStatus::Failed;
        case TaskStatus::Completed:
        case TaskStatus::Failed:
            return false;
    }
    return false;
}

TaskStar TaskStar::from_spec(const TaskSpec& spec) {
    TaskStar t;
    t.id = spec.id;
    t.name = spec.name;
    t.description = spec.description;
    t.tips = spec.tips;
    t.device = spec.device;
    return t;
}

TaskSpec TaskStar::spec() const {
    return TaskSpec{id, name, description, tips, device};
}

bool TaskPatch::empty() const {
    return !name && !description && !device && !tips && !status && !result;
}

std::string_view to_string(TaskStatus s) {
    switch (s) {
        case TaskStatus::Pending:   return "PENDING";
        case TaskStatus::Running:   return "RUNNING";
        case TaskStatus::Completed: return "COMPLETED";
        case TaskStatus::Failed:    return "FAILED";
    }
    return "PENDING";
}

std::string_view to_string(FailureReason r) {
    switch (r) {
        case FailureReason::ExecutionError:        return "EXECUTION_ERROR";
        case FailureReason::DependencyUnsatisfied: return "DEPENDENCY_UNSATISFIED";
        case FailureReason::AgentDisconnected:     return "AGENT_DISCONNECTED";
        case FailureReason::Timeout:               return "TIMEOUT";
        case FailureReason::PlannerCancelled:      return "PLANNER_CANCELLED";
    }
    return "EXECUTION_ERROR";
}

std::string_view to_string(DependencyType::Kind k) {
    switch (k) {
        case DependencyType::Kind::Unconditional: return "UNCONDITIONAL";
        case DependencyType::Kind::SuccessOnly:   return "SUCCESS_ONLY";
        case DependencyType::Kind::Conditional:   return "CONDITIONAL";
    }
    return "UNCONDITIONAL";
}

std::optional<TaskStatus> parse_task_status(std::string_view s) {
    if (s == "PENDING") return TaskStatus::Pending;
    if (s == "RUNNING") return TaskStatus::Running;
    if (s == "COMPLETED") return TaskStatus::Completed;
    if (s == "FAILED") return TaskStatus::Failed;
    return std::nullopt;
}

std::optional<FailureReason> parse_failure_reason(std::string_view s) {
    if (s == "EXECUTION_ERROR") return FailureReason::ExecutionError;
    if (s == "DEPENDENCY_UNSATISFIED") return FailureReason::DependencyUnsatisfied;
    if (s == "AGENT_DISCONNECTED") return FailureReason::AgentDisconnected;
    if (s == "TIMEOUT") return FailureReason::Timeout;
    if (s == "PLANNER_CANCELLED") return FailureReason::PlannerCancelled;
    return std::nullopt;
}

std::optional<DependencyType::Kind> parse_dependency_kind(std::string_view s) {
    if (s == "UNCONDITIONAL") return DependencyType::Kind::Unconditional;
    if (s == "SUCCESS_ONLY") return DependencyType::Kind::SuccessOnly;
    if (s == "CONDITIONAL") return DependencyType::Kind::Conditional;
    return std::nullopt;
}

}  // namespace constellation
