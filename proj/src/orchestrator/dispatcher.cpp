#include "constellation/orchestrator/dispatcher.hpp"

#include "constellation/error.hpp"

namespace constellation {

std::string_view to_string(DeviceAvailability a) {
    switch (a) {
        case DeviceAvailability::Available:   return "AVAILABLE";
        case DeviceAvailability::Unavailable: return "UNAVAILABLE";
        case DeviceAvailability::Lost:        return "LOST";
        case DeviceAvailability::Unknown:     return "UNKNOWN";
    }
    return "UNKNOWN";
}

DeviceAvailability ScriptedDispatcher::availability(const DeviceId& d) const {
    if (!devices_.count(d)) return DeviceAvailability::Unknown;
    if (lost_.count(d)) return DeviceAvailability::Lost;
    if (down_.count(d)) return DeviceAvailability::Unavailable;
    return DeviceAvailability::Available;
}

void ScriptedDispatcher::notify() {
    for (auto& l : listeners_) l();
}

void ScriptedDispatcher::add_fault(const DeviceId& d, DeviceFault f) {
    ctx_.post_after(f.down, [this, d, f] {
        if (f.up) down_.insert(d);
        else lost_.insert(d);
        // Running tasks on the device fail right away.
        std::vector<TaskId> victims;
        for (const auto& [id, r] : running_)
            if (r.device == d) victims.push_back(id);
        for (const auto& id : victims) {
            auto r = running_.at(id);
            running_.erase(id);
            ctx_.cancel(r.timer);
            OrchestratorEvent e;
            e.kind = EventKind::TaskFailed;
            e.task_id = id;
            e.device = d;
            e.failure_reason = FailureReason::AgentDisconnected;
            e.payload = Json{{"error", "device " + d + " disconnected"}};
            e.timestamp = ctx_.now();
            r.done(e);
        }
        notify();
    });
    if (f.up) {
        ctx_.post_after(*f.up, [this, d] {
            down_.erase(d);
            notify();
        });
    }
}

void ScriptedDispatcher::dispatch(const TaskStar& task, Done done) {
    if (availability(task.device) != DeviceAvailability::Available)
        throw Error(ErrorCode::DispatchError, "device " + task.device + " is not available");
    ++dispatched_;
    Outcome o;
    if (auto it = outcomes_.find(task.id); it != outcomes_.end())
        o = it->second;
    else
        o.duration = default_duration_;
    auto id = task.id;
    auto device = task.device;
    auto timer = ctx_.post_after(o.duration, [this, id, device, o] {
        auto it = running_.find(id);
        if (it == running_.end()) return;
        auto cb = it->second.done;
        running_.erase(it);
        OrchestratorEvent e;
        e.kind = o.success ? EventKind::TaskCompleted : EventKind::TaskFailed;
        e.task_id = id;
        e.device = device;
        e.payload = o.result.is_null() ? Json{{"task", id}, {"duration", o.duration}} : o.result;
        if (!o.success) e.failure_reason = FailureReason::ExecutionError;
        e.timestamp = ctx_.now();
        cb(e);
    });
    running_[id] = Running{device, timer, std::move(done)};
}

void ScriptedDispatcher::abandon(const TaskId& task) {
    auto it = running_.find(task);
    if (it == running_.end()) return;
    ctx_.cancel(it->second.timer);
    running_.erase(it);
}

Json ScriptedDispatcher::profiles() const {
    Json out = Json::array();
    for (const auto& d : devices_)
        out.push_back({{"agent_id", d}, {"status", std::string(to_string(availability(d)))}});
    return out;
}

}  // namespace constellation
