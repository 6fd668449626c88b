#include <doctest.h>

#include "constellation/core/serialize.hpp"
#include "constellation/error.hpp"
#include "constellation/planner/script.hpp"
#include "helpers.hpp"

using namespace constellation;

namespace {

OrchestratorEvent ev(EventKind k, const std::string& task, double t = 0.0) {
    OrchestratorEvent e;
    e.kind = k;
    e.task_id = task;
    e.timestamp = t;
    e.device = "linux1";
    if (k == EventKind::TaskFailed) e.failure_reason = FailureReason::AgentDisconnected;
    if (k == EventKind::TaskCompleted) e.payload = Json{{"duration", 30.5}, {"summary", "ok"}};
    return e;
}

PlannerInput edit_input(const TaskConstellation& c, std::vector<OrchestratorEvent> events) {
    PlannerInput in;
    in.mode = PlannerMode::Edit;
    in.request = c.request();
    in.snapshot = serialize(c);
    in.events = std::move(events);
    return in;
}

TaskConstellation jobs() {
    return deserialize_text(testutil::read_file(testutil::source_path("scenarios/jobs.json")));
}

}  // namespace

TEST_CASE("fsm_advance follows the planner state graph") {
    CHECK(fsm_advance(PlannerState::Start, PlannerState::Continue) == PlannerState::Continue);
    CHECK(fsm_advance(PlannerState::Start, PlannerState::Finish) == PlannerState::Finish);
    CHECK(fsm_advance(PlannerState::Start, PlannerState::Fail) == PlannerState::Fail);
    CHECK(fsm_advance(PlannerState::Continue, PlannerState::Continue) == PlannerState::Continue);
    CHECK(fsm_advance(PlannerState::Continue, PlannerState::Finish) == PlannerState::Finish);
    CHECK(fsm_advance(PlannerState::Continue, PlannerState::Fail) == PlannerState::Fail);
    for (auto next : {PlannerState::Start, PlannerState::Continue, PlannerState::Finish, PlannerState::Fail}) {
        CHECK_THROWS_AS(fsm_advance(PlannerState::Finish, next), Error);
        CHECK_THROWS_AS(fsm_advance(PlannerState::Fail, next), Error);
    }
    CHECK_THROWS_AS(fsm_advance(PlannerState::Continue, PlannerState::Start), Error);
}

TEST_CASE("load_script counts and rejects") {
    auto s1 = load_script_file(testutil::source_path("scenarios/planner_retry_once.json"));
    CHECK(s1.strict);
    CHECK(s1.triggers.size() == 4);

    auto empty = load_script("");
    CHECK_FALSE(empty.strict);
    CHECK(empty.triggers.empty());
    CHECK(load_script("  \n").triggers.empty());

    auto code = [](const std::string& text) {
        try {
            load_script(text);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::NotFound;
    };
    CHECK(code(R"({"triggers":[{"mode":"EDIT","events":[{"kind":"TASK_EXPLODED"}],"output":{}}]})") ==
          ErrorCode::ParseError);
    CHECK(code(R"({"triggers":[{"mode":"EDIT","events":[{"task":"A","min":2,"max":1}],"output":{}}]})") ==
          ErrorCode::ParseError);
    CHECK(code(R"({"triggers":[{"mode":"EDIT","output":{"delta":[{"op":"add_task"}]}}]})") == ErrorCode::ParseError);
    CHECK(code(R"({"triggers":[{"mode":"SOMETIMES","output":{}}]})") == ErrorCode::ParseError);
    CHECK(code("{not json") == ErrorCode::ParseError);
}

TEST_CASE("empty script falls back without edits") {
    ScriptedPlanner p(load_script(""));
    auto c = jobs();
    auto out = p.edit(edit_input(c, {ev(EventKind::TaskCompleted, "A")}));
    CHECK(out.delta.empty());
    CHECK(out.next_state == PlannerState::Continue);
    CHECK_FALSE(out.observation.empty());
    CHECK_FALSE(out.thought.empty());
    CHECK_FALSE(out.result.empty());

    for (const auto& [id, t] : c.tasks()) {
        c.transition(id, TaskStatus::Running);
        c.transition(id, TaskStatus::Completed, Json{{"ok", true}});
    }
    CHECK(p.edit(edit_input(c, {ev(EventKind::TaskCompleted, "D")})).next_state == PlannerState::Finish);

    PlannerInput create;
    create.mode = PlannerMode::Create;
    auto cout = p.create(create);
    CHECK(cout.delta.empty());
    CHECK(cout.next_state == PlannerState::Finish);
}

TEST_CASE("strict script without a matching trigger is a ScriptMiss") {
    ScriptedPlanner p(load_script(R"({"strict":true,"triggers":[]})"));
    try {
        p.edit(edit_input(jobs(), {ev(EventKind::TaskCompleted, "A")}));
        FAIL("expected ScriptMiss");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ScriptMiss);
    }
}

TEST_CASE("event patterns match greedily and must cover the batch") {
    std::vector<EventPattern> ps(1);
    ps[0].kind = EventKind::TaskCompleted;
    ps[0].task = "?";
    ps[0].max = 3;
    std::vector<OrchestratorEvent> b{ev(EventKind::TaskCompleted, "B"), ev(EventKind::TaskCompleted, "C")};
    auto m = match_events(ps, b);
    REQUIRE(m);
    CHECK(m->size() == 2);
    b.push_back(ev(EventKind::TaskFailed, "A"));
    CHECK_FALSE(match_events(ps, b));
    EventPattern f;
    f.kind = EventKind::TaskFailed;
    f.task = "A";
    ps.push_back(f);
    CHECK(match_events(ps, b));
    ps[0].min = 3;
    CHECK_FALSE(match_events(ps, b));
    CHECK(match_events({}, {}));
    CHECK_FALSE(match_events({}, b));
}

TEST_CASE("retry trigger copies the failed task and rewires the report") {
    ScriptedPlanner p(load_script_file(testutil::source_path("scenarios/planner_retry_once.json")));
    auto c = jobs();
    c.transition("A", TaskStatus::Running);
    c.transition("B", TaskStatus::Running);
    c.transition("A", TaskStatus::Failed, Json{{"error", "gone"}}, FailureReason::AgentDisconnected);
    auto out = p.edit(edit_input(c, {ev(EventKind::TaskFailed, "A")}));
    CHECK(out.next_state == PlannerState::Continue);
    REQUIRE(out.delta.ops.size() == 2);
    auto applied = apply_delta(c, out.delta);
    const auto& r = applied.constellation.task("A_retry");
    CHECK(r.name == c.task("A").name);
    CHECK(r.description == c.task("A").description);
    CHECK(r.device == "linux1");
    CHECK(r.tips == c.task("A").tips);
    CHECK(r.status == TaskStatus::Pending);
    CHECK(applied.constellation.find_edge("A_retry", "D"));
    CHECK(applied.summary.added_tasks == 1);
    CHECK(applied.summary.added_dependencies == 1);
    CHECK(out.observation.find("AGENT_DISCONNECTED") != std::string::npos);

    // Delta hygiene: every referenced id exists in the snapshot or is added by the delta.
    for (const auto& o : out.delta.ops)
        if (auto* d = std::get_if<op::AddDependency>(&o)) {
            CHECK((c.has_task(d->spec.from_task) || d->spec.from_task == "A_retry"));
            CHECK(c.has_task(d->spec.to_task));
        }
}

TEST_CASE("description_append accumulates within one delta") {
    ScriptedPlanner p(load_script_file(testutil::source_path("scenarios/planner_retry_once.json")));
    auto c = jobs();
    auto out = p.edit(edit_input(c, {ev(EventKind::TaskCompleted, "B"), ev(EventKind::TaskCompleted, "C")}));
    auto post = apply_delta(c, out.delta).constellation;
    auto d = post.task("D").description;
    CHECK(d.rfind(c.task("D").description, 0) == 0);
    CHECK(d.find("- B on linux1: long_job.sh ran 30.5 s") != std::string::npos);
    CHECK(d.find("- C on linux1: long_job.sh ran 30.5 s") != std::string::npos);
    CHECK(d.find("- B") < d.find("- C"));
}

TEST_CASE("state conditions gate a trigger") {
    ScriptedPlanner p(load_script_file(testutil::source_path("scenarios/planner_give_up.json")));
    auto c = jobs();
    for (auto id : {"A", "B", "C"}) {
        c.transition(id, TaskStatus::Running);
        c.transition(id, TaskStatus::Failed, Json{{"error", "x"}}, FailureReason::AgentDisconnected);
    }
    auto out = p.edit(edit_input(c, {ev(EventKind::TaskFailed, "A"), ev(EventKind::TaskFailed, "B"),
                                     ev(EventKind::TaskFailed, "C")}));
    auto c2 = apply_delta(c, out.delta).constellation;
    CHECK(c2.has_task("C_retry"));
    c2.transition("A_retry", TaskStatus::Failed, Json{{"error", "x"}}, FailureReason::AgentDisconnected);
    auto partial = p.edit(edit_input(c2, {ev(EventKind::TaskFailed, "A_retry")}));
    CHECK(partial.next_state == PlannerState::Continue);
    c2.transition("B_retry", TaskStatus::Failed, Json{{"error", "x"}}, FailureReason::AgentDisconnected);
    c2.transition("C_retry", TaskStatus::Failed, Json{{"error", "x"}}, FailureReason::AgentDisconnected);
    auto last = p.edit(edit_input(c2, {ev(EventKind::TaskFailed, "B_retry"), ev(EventKind::TaskFailed, "C_retry")}));
    CHECK(last.next_state == PlannerState::Fail);
    CHECK(last.delta.empty());
    CHECK(last.result.find(" s ") == std::string::npos);
}

TEST_CASE("create mode: build, infeasible, and shape check") {
    auto script = load_script(R"({
      "strict": true,
      "triggers": [
        {"mode": "CREATE", "request": "fig4*", "output": {"next_state": "CONTINUE", "delta": [
          {"op": "build_constellation", "clear": true, "config": {"tasks": [
             {"id": "A", "device": "linux1"}, {"id": "B", "device": "linux2"}, {"id": "C", "device": "windows1"},
             {"id": "D", "device": "windows1"}, {"id": "E", "device": "mobile1"}],
           "dependencies": [
             {"id": "A->C", "from_task": "A", "to_task": "C"}, {"id": "B->D", "from_task": "B", "to_task": "D"},
             {"id": "C->D", "from_task": "C", "to_task": "D"},
             {"id": "C->E", "from_task": "C", "to_task": "E", "dep_type": "SUCCESS_ONLY"},
             {"id": "D->E", "from_task": "D", "to_task": "E", "dep_type": "SUCCESS_ONLY"}]}}]}},
        {"mode": "CREATE", "request": "negative*", "output": {"next_state": "FAIL",
          "result": "No registered device can do this; refusing"}},
        {"mode": "CREATE", "request": "bad*", "output": {"next_state": "CONTINUE", "delta": [{"op": "remove_task", "id": "A"}]}}
      ]})");
    ScriptedPlanner p(script);
    PlannerInput in;
    in.mode = PlannerMode::Create;
    in.request = "fig4 example";
    auto out = p.create(in);
    CHECK(out.next_state == PlannerState::Continue);
    auto c = apply_delta(TaskConstellation(in.request), out.delta).constellation;
    CHECK(c.tasks().size() == 5);
    CHECK(c.edges().size() == 5);

    in.request = "negative: teleport the printer";
    auto neg = p.create(in);
    CHECK(neg.next_state == PlannerState::Fail);
    CHECK(neg.delta.empty());
    CHECK(neg.result.find("refusing") != std::string::npos);

    in.request = "bad";
    CHECK_THROWS_AS(p.create(in), Error);
}

TEST_CASE("render fills placeholders and leaves unknown ones") {
    auto c = jobs();
    auto snap = serialize(c);
    auto e = ev(EventKind::TaskCompleted, "B");
    CHECK(render("${event.task}/${event.kind}/${event.result.duration}", &snap, &e, "") == "B/TASK_COMPLETED/30.5");
    CHECK(render("${task.D.device}", &snap, nullptr, "") == "windows1");
    CHECK(render("${nope} ${request}", &snap, nullptr, "req") == "${nope} req");
    CHECK(render("${unterminated", &snap, nullptr, "") == "${unterminated");
}

TEST_CASE("scripted planner replays deterministically") {
    auto run_once = [] {
        ScriptedPlanner p(load_script_file(testutil::source_path("scenarios/planner_degrade.json")));
        auto c = jobs();
        std::vector<Json> outs;
        outs.push_back(to_json(p.edit(edit_input(c, {ev(EventKind::TaskCompleted, "B")}))));
        outs.push_back(to_json(p.edit(edit_input(c, {ev(EventKind::TaskFailed, "A")}))));
        return outs;
    };
    CHECK(run_once() == run_once());
}

TEST_CASE("external planner round-trips through JSON") {
    Json seen;
    ExternalPlanner p([&](const Json& req) {
        seen = req;
        return Json{{"observation", "o"}, {"thought", "t"}, {"next_state", "FINISH"}, {"result", "r"},
                    {"delta", Json::array()}};
    });
    PlannerInput in = edit_input(jobs(), {ev(EventKind::TaskCompleted, "A")});
    in.demonstrations = Json::array({"example"});
    auto out = p.edit(in);
    CHECK(out.next_state == PlannerState::Finish);
    CHECK(seen["mode"] == "EDIT");
    CHECK(seen["events"].size() == 1);
    CHECK(seen["demonstrations"][0] == "example");
}
