#include "constellation/orchestrator/report.hpp"

#include "constellation/core/serialize.hpp"

namespace constellation {

std::string_view to_string(RunOutcome o) {
    switch (o) {
        case RunOutcome::Success: return "SUCCESS";
        case RunOutcome::Partial: return "PARTIAL";
        case RunOutcome::Failed:  return "FAILED";
    }
    return "PARTIAL";
}

std::optional<RunOutcome> parse_run_outcome(std::string_view s) {
    if (s == "SUCCESS") return RunOutcome::Success;
    if (s == "PARTIAL") return RunOutcome::Partial;
    if (s == "FAILED") return RunOutcome::Failed;
    return std::nullopt;
}

double RunReport::edit_time() const {
    double t = 0.0;
    for (const auto& c : edit_cycles) t += c.end - c.start;
    return t;
}

namespace {
Json opt_time(const std::optional<double>& t) {
    return t ? Json(round_time(*t)) : Json(nullptr);
}
}  // namespace

Json to_json(const EditCycleRecord& r) {
    Json batch = Json::array();
    for (const auto& e : r.batch) batch.push_back(to_json(e));
    Json j{{"index", r.index},
           {"start", round_time(r.start)},
           {"end", round_time(r.end)},
           {"batch", batch},
           {"batch_size", r.batch.size()},
           {"planner_called", r.planner_called},
           {"attempts", r.attempts},
           {"rejections", r.rejections},
           {"summary", to_json(r.summary)},
           {"version_before", r.version_before},
           {"version_after", r.version_after},
           {"planner_state", to_string(r.planner_state)},
           {"phi_before", r.phi_before},
           {"phi_after", r.phi_after},
           {"added_tasks", r.added_tasks}};
    j["delta"] = r.delta ? to_json(*r.delta) : Json(nullptr);
    return j;
}

Json to_json(const RunReport& r) {
    Json timings = Json::object();
    for (const auto& [id, t] : r.timings) {
        timings[id] = Json{{"device", t.device ? Json(*t.device) : Json(nullptr)},
                           {"start", opt_time(t.start)},
                           {"end", opt_time(t.end)},
                           {"duration", round_time(t.duration())}};
    }
    Json events = Json::array();
    for (const auto& e : r.events) events.push_back(to_json(e));
    Json cycles = Json::array();
    for (const auto& c : r.edit_cycles) cycles.push_back(to_json(c));
    Json trace = Json::array();
    for (const auto& p : r.planner_trace) {
        Json j = to_json(p.output);
        j["cycle"] = p.cycle;
        j["t"] = round_time(p.t);
        j["mode"] = to_string(p.mode);
        if (p.rejected) j["rejected"] = *p.rejected;
        trace.push_back(j);
    }
    Json dropped = Json::array();
    for (const auto& d : r.dropped_events) dropped.push_back({{"event", to_json(d.event)}, {"reason", d.reason}});
    Json checks{{"lock_violations", r.checks.lock_violations},
                {"version_mismatches", r.checks.version_mismatches},
                {"i1_violations", r.checks.i1_violations},
                {"i2_violations", r.checks.i2_violations},
                {"i3_violations", r.checks.i3_violations},
                {"phi_violations", r.checks.phi_violations},
                {"handler_failures", r.checks.handler_failures},
                {"running_on_disconnected", r.checks.running_on_disconnected},
                {"guard_hit", r.checks.guard_hit}};
    Json j{{"schema", "constellation.run-report.v1"},
           {"request", r.request},
           {"outcome", to_string(r.outcome)},
           {"planner_final_state", to_string(r.planner_final_state)},
           {"planner_result", r.planner_result},
           {"error", r.error ? Json(*r.error) : Json(nullptr)},
           {"started_at", round_time(r.started_at)},
           {"finished_at", round_time(r.finished_at)},
           {"makespan", round_time(r.makespan())},
           {"initial_constellation", serialize(r.initial)},
           {"final_constellation", serialize(r.final_constellation)},
           {"timings", timings},
           {"events", events},
           {"edit_cycles", cycles},
           {"planner_trace", trace},
           {"dropped_events", dropped},
           {"checks", checks},
           {"dispatch_counts", r.dispatch_counts}};
    for (const auto& [k, v] : r.extra.items()) j[k] = v;
    return j;
}

}  // namespace constellation
