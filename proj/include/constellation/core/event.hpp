#pragma once

#include <optional>
#include <string>

#include "constellation/core/types.hpp"

namespace constellation {

enum class EventKind { TaskStarted, TaskCompleted, TaskFailed, ConstellationModified };

std::string_view to_string(EventKind k);
std::optional<EventKind> parse_event_kind(std::string_view s);

struct OrchestratorEvent {
    EventKind kind = EventKind::TaskCompleted;
    std::optional<TaskId> task_id;
    // TASK_COMPLETED/TASK_FAILED: the task's final result (or error) payload.
    // CONSTELLATION_MODIFIED: the delta summary. TASK_STARTED: {"device": ...}.
    std::optional<Json> payload;
    std::optional<FailureReason> failure_reason;
    std::optional<DeviceId> device;
    double timestamp = 0.0;

    bool operator==(const OrchestratorEvent&) const = default;
};

Json to_json(const OrchestratorEvent& e);
OrchestratorEvent event_from_json(const Json& j);

// Times are printed rounded to the microsecond so logs stay readable and stable.
double round_time(double t);

}  // namespace constellation
