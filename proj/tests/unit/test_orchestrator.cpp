#include <doctest.h>

#include <algorithm>

#include "constellation/core/serialize.hpp"
#include "constellation/error.hpp"
#include "constellation/orchestrator/orchestrator.hpp"
#include "constellation/planner/script.hpp"
#include "helpers.hpp"

using namespace constellation;

namespace {

ScriptedDispatcher fleet(sim::VirtualClock& clock, const TaskConstellation& c) {
    ScriptedDispatcher d(clock);
    for (const auto& [id, t] : c.tasks()) d.add_device(t.device);
    return d;
}

std::vector<std::string> kinds_for(const RunReport& r, EventKind k) {
    std::vector<std::string> out;
    for (const auto& e : r.events)
        if (e.kind == k) out.push_back(*e.task_id);
    return out;
}

}  // namespace

TEST_CASE("fig4 runs to SUCCESS respecting edges") {
    auto c = testutil::fig4();
    sim::VirtualClock clock;
    auto d = fleet(clock, c);
    ScriptedPlanner p(load_script(""));
    int completions = 0;
    Orchestrator o(clock, p, d);
    o.bus().subscribe(EventKind::TaskCompleted, [&](const OrchestratorEvent&) { ++completions; });
    o.on_finished([&] { clock.stop(); });
    o.start(c);
    clock.run();
    REQUIRE(o.finished());
    const auto& r = o.report();
    CHECK(r.outcome == RunOutcome::Success);
    CHECK(r.planner_final_state == PlannerState::Finish);
    CHECK(completions == 5);
    CHECK(kinds_for(r, EventKind::TaskCompleted).size() == 5);
    // Every edge: upstream ends before downstream starts.
    for (const auto& [eid, e] : c.edges())
        CHECK(*r.timings.at(e.from_task).end <= *r.timings.at(e.to_task).start);
    // A and B overlap; E is last.
    CHECK(*r.timings.at("A").start < *r.timings.at("B").end);
    CHECK(*r.timings.at("B").start < *r.timings.at("A").end);
    for (const auto& id : {"A", "B", "C", "D"}) CHECK(*r.timings.at(id).end <= *r.timings.at("E").start);
    CHECK(r.checks.total() == 0);
    // A and B finish together and are presented in one batch.
    REQUIRE_FALSE(r.edit_cycles.empty());
    CHECK(r.edit_cycles[0].batch.size() == 2);
    // One CONSTELLATION_MODIFIED per committed delta.
    std::size_t committed = std::count_if(r.edit_cycles.begin(), r.edit_cycles.end(),
                                          [](const auto& cy) { return cy.delta.has_value(); });
    std::size_t mods = std::count_if(r.events.begin(), r.events.end(),
                                     [](const auto& e) { return e.kind == EventKind::ConstellationModified; });
    CHECK(mods == committed);
    // Timestamps never go backwards.
    for (std::size_t i = 1; i < r.events.size(); ++i) CHECK(r.events[i - 1].timestamp <= r.events[i].timestamp);
}

TEST_CASE("single task: one dispatch, one completion") {
    TaskConstellation c("one");
    c.add_task(TaskSpec{"t", "t", "", {}, "dev"});
    sim::VirtualClock clock;
    auto d = fleet(clock, c);
    ScriptedPlanner p(load_script(""));
    auto r = run(c, p, d, clock);
    CHECK(r.outcome == RunOutcome::Success);
    CHECK(r.dispatch_counts.at("t") == 1);
    CHECK(kinds_for(r, EventKind::TaskCompleted).size() == 1);
    REQUIRE(r.edit_cycles.size() == 1);
    CHECK(r.edit_cycles[0].summary.total() == 0);
}

TEST_CASE("events arriving during planning are batched into the next call") {
    // A finishes at 10, B at 11 and C at 11.5 while the planner is busy.
    TaskConstellation c("fig7");
    for (auto id : {"A", "B", "C"}) c.add_task(TaskSpec{id, id, "", {}, std::string("dev") + id});
    sim::VirtualClock clock;
    auto d = fleet(clock, c);
    d.set_outcome("A", {10.0, true, {}});
    d.set_outcome("B", {11.0, true, {}});
    d.set_outcome("C", {11.5, true, {}});
    ScriptedPlanner p(load_script(""));
    auto r = run(c, p, d, clock);
    REQUIRE(r.edit_cycles.size() == 2);
    CHECK(r.edit_cycles[0].batch.size() == 1);
    CHECK(r.edit_cycles[1].batch.size() == 2);
    CHECK(r.edit_cycles[1].start == doctest::Approx(12.0));
    CHECK(r.edit_cycles[0].phi_before > r.edit_cycles[0].phi_after);
    CHECK(r.checks.phi_violations == 0);
    // The lock was held from 10 to 14 without interruption.
    CHECK(r.edit_cycles[1].end == doctest::Approx(14.0));
}

TEST_CASE("delta touching a running task is rejected, re-presented, then escalated") {
    TaskConstellation c("bad");
    c.add_task(TaskSpec{"A", "A", "", {}, "d1"});
    c.add_task(TaskSpec{"B", "B", "", {}, "d2"});
    sim::VirtualClock clock;
    auto d = fleet(clock, c);
    d.set_outcome("A", {1.0, true, {}});
    d.set_outcome("B", {50.0, true, {}});
    ScriptedPlanner p(load_script(R"({"triggers":[{"mode":"EDIT","output":{"delta":[{"op":"remove_task","id":"B"}]}}]})"));
    auto r = run(c, p, d, clock);
    CHECK(r.outcome == RunOutcome::Failed);
    REQUIRE(r.error);
    CHECK(r.error->find("PlannerError") == 0);
    REQUIRE_FALSE(r.edit_cycles.empty());
    CHECK(r.edit_cycles[0].attempts == 2);
    CHECK(r.edit_cycles[0].rejections.size() == 2);
    // B was still drained, not orphaned.
    CHECK(r.final_constellation.task("B").status == TaskStatus::Completed);
    CHECK(r.checks.i3_violations == 0);
}

TEST_CASE("rejection reason reaches the planner on re-presentation") {
    TaskConstellation c("retry");
    c.add_task(TaskSpec{"A", "A", "", {}, "d1"});
    sim::VirtualClock clock;
    auto d = fleet(clock, c);
    int calls = 0;
    std::optional<std::string> second_rejection;
    ExternalPlanner p([&](const Json& in) {
        ++calls;
        if (in.contains("rejection")) {
            second_rejection = in["rejection"].get<std::string>();
            return Json{{"next_state", "FINISH"}, {"delta", Json::array()}};
        }
        return Json{{"next_state", "CONTINUE"},
                    {"delta", Json::array({{{"op", "update_task"}, {"id", "A"}, {"patch", {{"name", "x"}}}}})}};
    });
    auto r = run(c, p, d, clock);
    CHECK(calls == 2);
    REQUIRE(second_rejection);
    CHECK(second_rejection->find("ImmutableTask") != std::string::npos);
    CHECK(r.outcome == RunOutcome::Success);
}

TEST_CASE("unavailable device keeps the task pending; lost device fails it") {
    TaskConstellation c("dev");
    c.add_task(TaskSpec{"A", "A", "", {}, "flaky"});
    c.add_task(TaskSpec{"B", "B", "", {}, "ghost"});
    sim::VirtualClock clock;
    ScriptedDispatcher d(clock);
    d.add_device("flaky");
    d.add_fault("flaky", {0.0, 5.0});
    ScriptedPlanner p(load_script(""));
    auto r = run(c, p, d, clock);
    CHECK(*r.timings.at("A").start == doctest::Approx(5.0));
    CHECK(r.final_constellation.task("A").status == TaskStatus::Completed);
    CHECK(r.final_constellation.task("B").status == TaskStatus::Failed);
    CHECK(*r.final_constellation.task("B").failure_reason == FailureReason::AgentDisconnected);
    CHECK(r.dispatch_counts.count("B") == 0);
    CHECK(r.outcome == RunOutcome::Partial);
}

TEST_CASE("device drop mid-task yields one AGENT_DISCONNECTED failure") {
    TaskConstellation c("drop");
    c.add_task(TaskSpec{"A", "A", "", {}, "d1"});
    sim::VirtualClock clock;
    ScriptedDispatcher d(clock);
    d.add_device("d1");
    d.add_fault("d1", {3.0, std::nullopt});
    ScriptedPlanner p(load_script(""));
    auto r = run(c, p, d, clock);
    auto fails = kinds_for(r, EventKind::TaskFailed);
    CHECK(fails.size() == 1);
    CHECK(*r.final_constellation.task("A").failure_reason == FailureReason::AgentDisconnected);
}

TEST_CASE("timeout synthesizes TASK_FAILED(TIMEOUT) and late outcome is dropped") {
    TaskConstellation c("slow");
    c.add_task(TaskSpec{"A", "A", "", {}, "d1"});
    sim::VirtualClock clock;
    auto d = fleet(clock, c);
    d.set_outcome("A", {500.0, true, {}});
    ScriptedPlanner p(load_script(""));
    OrchestratorConfig cfg;
    cfg.task_timeout = 300.0;
    auto r = run(c, p, d, clock, cfg);
    CHECK(*r.final_constellation.task("A").failure_reason == FailureReason::Timeout);
    CHECK(*r.timings.at("A").end == doctest::Approx(300.0));

    // A stale outcome for a task that already timed out goes to dropped_events.
    c.add_task(TaskSpec{"B", "B", "", {}, "d2"});
    c.add_task(TaskSpec{"C", "C", "", {}, "d3"});
    c.add_dependency(TaskStarLine{"B->C", "B", "C", {}, ""});
    sim::VirtualClock clock2;
    auto d2 = fleet(clock2, c);
    d2.set_outcome("A", {500.0, true, {}});
    d2.set_outcome("B", {250.0, true, {}});
    d2.set_outcome("C", {200.0, true, {}});
    Orchestrator o(clock2, p, d2, cfg);
    o.start(c);
    clock2.run(350.0);
    OrchestratorEvent late;
    late.kind = EventKind::TaskCompleted;
    late.task_id = "A";
    o.enqueue(late);
    clock2.run(360.0);
    CHECK_FALSE(o.finished());
    REQUIRE(o.report().dropped_events.size() == 1);
    CHECK(o.report().dropped_events[0].event.task_id == "A");
}

TEST_CASE("dispatch error becomes AGENT_DISCONNECTED") {
    struct Refusing final : Dispatcher {
        DeviceAvailability availability(const DeviceId&) const override { return DeviceAvailability::Available; }
        void dispatch(const TaskStar&, Done) override { throw Error(ErrorCode::DispatchError, "refused"); }
        void on_availability_change(std::function<void()>) override {}
    } d;
    TaskConstellation c("x");
    c.add_task(TaskSpec{"A", "A", "", {}, "d1"});
    sim::VirtualClock clock;
    ScriptedPlanner p(load_script(""));
    auto r = run(c, p, d, clock);
    CHECK(*r.final_constellation.task("A").failure_reason == FailureReason::AgentDisconnected);
}

TEST_CASE("planner FAIL cancels pending tasks and drains running ones") {
    TaskConstellation c("fail");
    c.add_task(TaskSpec{"A", "A", "", {}, "d1"});
    c.add_task(TaskSpec{"B", "B", "", {}, "d2"});
    c.add_task(TaskSpec{"C", "C", "", {}, "d3"});
    c.add_dependency(TaskStarLine{"B->C", "B", "C", {}, ""});
    sim::VirtualClock clock;
    auto d = fleet(clock, c);
    d.set_outcome("A", {1.0, false, {}});
    d.set_outcome("B", {20.0, true, {}});
    ScriptedPlanner p(load_script(R"({"triggers":[{"mode":"EDIT","events":[{"kind":"TASK_FAILED"}],
        "output":{"next_state":"FAIL","result":"give up"}}]})"));
    auto r = run(c, p, d, clock);
    CHECK(r.outcome == RunOutcome::Failed);
    CHECK(r.final_constellation.task("C").status == TaskStatus::Failed);
    CHECK(*r.final_constellation.task("C").failure_reason == FailureReason::PlannerCancelled);
    CHECK(r.final_constellation.task("B").status == TaskStatus::Completed);
    CHECK(r.dispatch_counts.count("C") == 0);
    CHECK(r.planner_result == "give up");
}

TEST_CASE("create mode builds then runs") {
    sim::VirtualClock clock;
    ScriptedDispatcher d(clock);
    d.add_device("dev");
    ScriptedPlanner p(load_script(R"({"triggers":[{"mode":"CREATE","output":{"next_state":"CONTINUE","delta":[
        {"op":"add_task","task":{"id":"only","device":"dev"}}]}}]})"));
    Orchestrator o(clock, p, d);
    o.on_finished([&] { clock.stop(); });
    o.start_request("do one thing");
    clock.run();
    CHECK(o.report().outcome == RunOutcome::Success);
    CHECK(o.report().initial.tasks().size() == 1);
}

TEST_CASE("failed handler does not disturb the run") {
    auto c = testutil::fig4();
    sim::VirtualClock clock;
    auto d = fleet(clock, c);
    ScriptedPlanner p(load_script(""));
    Orchestrator o(clock, p, d);
    o.bus().subscribe_all([](const OrchestratorEvent&) { throw std::runtime_error("boom"); });
    o.on_finished([&] { clock.stop(); });
    o.start(c);
    clock.run();
    CHECK(o.report().outcome == RunOutcome::Success);
    CHECK(o.report().checks.handler_failures > 0);
}

TEST_CASE("identical inputs give identical reports") {
    auto once = [] {
        auto c = testutil::fig4();
        sim::VirtualClock clock;
        auto d = fleet(clock, c);
        ScriptedPlanner p(load_script(""));
        return to_json(run(c, p, d, clock)).dump();
    };
    CHECK(once() == once());
}
