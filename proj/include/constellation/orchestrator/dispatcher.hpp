#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "constellation/core/constellation.hpp"
#include "constellation/core/event.hpp"
#include "constellation/runtime/context.hpp"

namespace constellation {

enum class DeviceAvailability {
    Available,
    Unavailable,  // disconnected or still registering; may come back
    Lost,         // reconnection gave up
    Unknown,      // no such device configured
};

std::string_view to_string(DeviceAvailability a);

// The orchestrator's view of the device fleet.
class Dispatcher {
  public:
    // Receives TASK_COMPLETED / TASK_FAILED for a dispatched task. May be
    // called from any thread.
    using Done = std::function<void(OrchestratorEvent)>;

    virtual ~Dispatcher() = default;

    virtual DeviceAvailability availability(const DeviceId& device) const = 0;
    // Throws DispatchError if the device cannot take the task.
    virtual void dispatch(const TaskStar& task, Done done) = 0;
    // The orchestrator stopped waiting for this task (timeout).
    virtual void abandon(const TaskId&) {}
    // Called whenever some device's availability changes.
    virtual void on_availability_change(std::function<void()> cb) = 0;
    // Serialized profiles handed to the planner.
    virtual Json profiles() const { return Json::array(); }
};

// In-process dispatcher with scripted outcomes and device faults. Used by
// tests and by ad-hoc runs without the protocol stack.
class ScriptedDispatcher final : public Dispatcher {
  public:
    struct Outcome {
        double duration = 10.0;
        bool success = true;
        Json result;  // defaults to {"task": id, "duration": d}
    };
    struct DeviceFault {
        double down = 0.0;
        std::optional<double> up;  // nullopt: lost for good at `down`
    };

    explicit ScriptedDispatcher(ControlContext& ctx) : ctx_(ctx) {}

    void add_device(const DeviceId& d) { devices_.insert(d); }
    void set_outcome(const TaskId& task, Outcome o) { outcomes_[task] = std::move(o); }
    void set_default_duration(double d) { default_duration_ = d; }
    // Schedules a device outage relative to the current time of `ctx`.
    void add_fault(const DeviceId& d, DeviceFault f);

    DeviceAvailability availability(const DeviceId& device) const override;
    void dispatch(const TaskStar& task, Done done) override;
    void abandon(const TaskId& task) override;
    void on_availability_change(std::function<void()> cb) override { listeners_.push_back(std::move(cb)); }
    Json profiles() const override;

    std::size_t dispatched() const { return dispatched_; }

  private:
    struct Running {
        DeviceId device;
        TimerId timer;
        Done done;
    };
    void notify();

    ControlContext& ctx_;
    std::set<DeviceId> devices_;
    std::set<DeviceId> down_;
    std::set<DeviceId> lost_;
    std::map<TaskId, Outcome> outcomes_;
    std::map<TaskId, Running> running_;
    std::vector<std::function<void()>> listeners_;
    double default_duration_ = 10.0;
    std::size_t dispatched_ = 0;
};

}  // namespace constellation
