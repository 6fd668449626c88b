#pragma once

#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <set>

#include "constellation/core/readiness.hpp"
#include "constellation/orchestrator/dispatcher.hpp"
#include "constellation/orchestrator/event_bus.hpp"
#include "constellation/orchestrator/report.hpp"
#include "constellation/planner/planner.hpp"
#include "constellation/runtime/context.hpp"
#include "constellation/sim/clock.hpp"

namespace constellation {

struct OrchestratorConfig {
    double planner_latency = 2.0;  // virtual seconds per planner call
    double task_timeout = 300.0;
    double max_time = 3600.0;  // guard against runs that never settle
    int max_rejections = 1;    // re-presents before PlannerError
};

// Runs one constellation to completion on a control context. All state lives
// on that context; enqueue() is the only entry point safe from other threads.
class Orchestrator {
  public:
    Orchestrator(ControlContext& ctx, Planner& planner, Dispatcher& dispatcher, OrchestratorConfig cfg = {},
                 const ConditionRegistry& conditions = empty_registry());

    EventBus& bus() { return bus_; }

    // Throws ValidationFailed if `c` is invalid.
    void start(TaskConstellation c);
    // CREATE mode first: the planner builds the constellation from the request.
    void start_request(const std::string& request);

    void enqueue(OrchestratorEvent e);

    bool finished() const { return finished_; }
    void on_finished(std::function<void()> cb) { finished_cbs_.push_back(std::move(cb)); }

    const RunReport& report() const { return report_; }
    const TaskConstellation& constellation() const { return c_; }
    bool lock_held() const { return held_; }
    const std::map<TaskId, DeviceId>& assignments() const { return assignments_; }
    PlannerState planner_state() const { return pstate_; }

  private:
    void on_event(OrchestratorEvent e);
    void try_edit();
    void cycle_begin();
    void cycle_commit(PlannerInput input, PlannerOutput out, int attempt);
    void planner_failed(const std::string& why);
    void release();
    void dispatch_ready();
    void fold_event(const OrchestratorEvent& e);
    void fold_arrived();
    void enter_terminal();
    void check_end();
    void finish();
    void publish(OrchestratorEvent e);
    void check_i1();
    std::size_t phi() const { return queue_.size() + inflight_.size(); }
    RunOutcome compute_outcome() const;
    bool superseded(const TaskId& id, int depth) const;

    ControlContext& ctx_;
    Planner& planner_;
    Dispatcher& dispatcher_;
    OrchestratorConfig cfg_;
    const ConditionRegistry& conditions_;
    EventBus bus_;

    TaskConstellation c_;
    std::uint64_t committed_version_ = 0;
    std::map<TaskId, DeviceId> assignments_;
    std::map<TaskId, DeviceId> assigned_at_dispatch_;
    std::map<TaskId, Json> frozen_;  // dispatched tasks, for the I3 check
    bool held_ = false;
    std::deque<OrchestratorEvent> queue_;
    std::set<TaskId> inflight_;
    std::set<TaskId> pending_failure_;
    std::map<TaskId, TimerId> timeouts_;
    PlannerState pstate_ = PlannerState::Start;
    bool planner_error_ = false;
    bool started_ = false;
    bool finished_ = false;
    bool edit_posted_ = false;
    EditCycleRecord current_;
    int cycles_ = 0;
    RunReport report_;
    std::vector<std::function<void()>> finished_cbs_;
};

// Virtual-clock run: starts, runs the clock until the run ends, and returns
// the report. The clock is stopped at the end so periodic timers do not spin.
RunReport run(TaskConstellation c, Planner& planner, Dispatcher& dispatcher, sim::VirtualClock& clock,
              OrchestratorConfig cfg = {}, const ConditionRegistry& conditions = empty_registry());

}  // namespace constellation
