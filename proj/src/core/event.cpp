#include "constellation/core/event.hpp"

#include <cmath>

#include "constellation/error.hpp"

namespace constellation {

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::TaskStarted:           return "TASK_STARTED";
        case EventKind::TaskCompleted:         return "TASK_COMPLETED";
        case EventKind::TaskFailed:            return "TASK_FAILED";
        case EventKind::ConstellationModified: return "CONSTELLATION_MODIFIED";
    }
    return "TASK_COMPLETED";
}

std::optional<EventKind> parse_event_kind(std::string_view s) {
    if (s == "TASK_STARTED") return EventKind::TaskStarted;
    if (s == "TASK_COMPLETED") return EventKind::TaskCompleted;
    if (s == "TASK_FAILED") return EventKind::TaskFailed;
    if (s == "CONSTELLATION_MODIFIED") return EventKind::ConstellationModified;
    return std::nullopt;
}

double round_time(double t) {
    return std::round(t * 1e6) / 1e6;
}

Json to_json(const OrchestratorEvent& e) {
    Json j{{"kind", to_string(e.kind)}, {"t", round_time(e.timestamp)}};
    if (e.task_id) j["task"] = *e.task_id;
    if (e.device) j["device"] = *e.device;
    if (e.payload) j["payload"] = *e.payload;
    if (e.failure_reason) j["failure_reason"] = to_string(*e.failure_reason);
    return j;
}

OrchestratorEvent event_from_json(const Json& j) {
    OrchestratorEvent e;
    auto k = parse_event_kind(j.value("kind", ""));
    if (!k) throw Error(ErrorCode::ParseError, "unknown event kind");
    e.kind = *k;
    e.timestamp = j.value("t", 0.0);
    if (j.contains("task")) e.task_id = j["task"].get<std::string>();
    if (j.contains("device")) e.device = j["device"].get<std::string>();
    if (j.contains("payload")) e.payload = j["payload"];
    if (j.contains("failure_reason")) e.failure_reason = parse_failure_reason(j["failure_reason"].get<std::string>());
    return e;
}

}  // namespace constellation
