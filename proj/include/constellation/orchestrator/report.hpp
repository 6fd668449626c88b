#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "constellation/core/constellation.hpp"
#include "constellation/core/delta.hpp"
#include "constellation/core/event.hpp"
#include "constellation/planner/planner.hpp"

namespace constellation {

enum class RunOutcome { Success, Partial, Failed };

std::string_view to_string(RunOutcome o);
std::optional<RunOutcome> parse_run_outcome(std::string_view s);

struct TaskTiming {
    std::optional<DeviceId> device;
    std::optional<double> start;  // dispatch time
    std::optional<double> end;    // outcome folded

    // Zero for tasks that never ran.
    double duration() const { return start && end ? *end - *start : 0.0; }
};

struct EditCycleRecord {
    int index = 0;
    double start = 0.0;
    double end = 0.0;
    std::vector<OrchestratorEvent> batch;
    bool planner_called = true;
    int attempts = 0;
    std::vector<std::string> rejections;
    std::optional<EditDelta> delta;  // the committed delta
    DeltaSummary summary;
    std::uint64_t version_before = 0;
    std::uint64_t version_after = 0;
    PlannerState planner_state = PlannerState::Start;
    std::size_t phi_before = 0;
    std::size_t phi_after = 0;
    std::vector<TaskId> added_tasks;
};

struct PlannerTraceEntry {
    int cycle = 0;  // -1 for CREATE
    double t = 0.0;
    PlannerMode mode = PlannerMode::Edit;
    PlannerOutput output;
    std::optional<std::string> rejected;  // set when the output was refused
};

struct DroppedEvent {
    OrchestratorEvent event;
    std::string reason;
};

// Instrumentation counters. All zero in a healthy run.
struct RunChecks {
    std::size_t lock_violations = 0;     // assignments created while HELD
    std::size_t version_mismatches = 0;  // dispatch saw an uncommitted version
    std::size_t i1_violations = 0;
    std::size_t i2_violations = 0;
    std::size_t i3_violations = 0;  // a dispatched task changed in a committed state
    std::size_t phi_violations = 0;  // Φ not strictly decreasing in a locked phase
    std::size_t handler_failures = 0;
    std::size_t running_on_disconnected = 0;  // filled in by the protocol world
    bool guard_hit = false;                   // stopped by the max-time guard

    std::size_t total() const {
        return lock_violations + version_mismatches + i1_violations + i2_violations + i3_violations +
               phi_violations + running_on_disconnected;
    }
};

struct RunReport {
    std::string request;
    RunOutcome outcome = RunOutcome::Partial;
    PlannerState planner_final_state = PlannerState::Start;
    std::string planner_result;
    std::optional<std::string> error;
    TaskConstellation initial;
    TaskConstellation final_constellation;
    std::map<TaskId, TaskTiming> timings;
    std::vector<OrchestratorEvent> events;
    std::vector<EditCycleRecord> edit_cycles;
    std::vector<PlannerTraceEntry> planner_trace;
    std::vector<DroppedEvent> dropped_events;
    RunChecks checks;
    std::map<TaskId, int> dispatch_counts;
    double started_at = 0.0;
    double finished_at = 0.0;
    // Extra sections supplied by the harness (wire log, verdict, metrics).
    Json extra = Json::object();

    double makespan() const { return finished_at - started_at; }
    double edit_time() const;
};

Json to_json(const EditCycleRecord& r);
Json to_json(const RunReport& r);

}  // namespace constellation
