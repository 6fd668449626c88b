#include <doctest.h>

#include "constellation/agent/executor.hpp"
#include "constellation/agent/fsm.hpp"
#include "constellation/agent/reasoner.hpp"
#include "constellation/agent/server.hpp"
#include "constellation/aip/checks.hpp"
#include "constellation/aip/profile.hpp"
#include "constellation/error.hpp"
#include "constellation/scenario/world.hpp"

using namespace constellation;
using namespace constellation::agent;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::ParseError;
}

aip::Action cli(const std::string& line) {
    return {"a1", "EXEC_CLI", {{"command", line}}};
}

ScriptedExecutor table() {
    return ScriptedExecutor::from_json(
        Json::parse(R"({"strict": true, "entries": [
            {"pattern": "echo hi", "stdout": "hi\n"},
            {"pattern": "bash long_job.sh", "duration": 30},
            {"pattern": "false", "status": 1, "stderr": "nope"}]})"),
        aip::gpu_node_telemetry());
}

scenario::World make_world(const Json& reasoner, const Json& executor, bool with_client = true,
                           std::vector<StrategyKind> strategies = kLinuxPipeline) {
    scenario::DeviceSpec d;
    d.id = "dev";
    d.telemetry = {{"os", "linux"}};
    d.executor = executor;
    d.reasoner = reasoner;
    d.start_client = with_client;
    d.server.strategies = std::move(strategies);
    scenario::WorldConfig cfg;
    cfg.devices.push_back(d);
    return scenario::World(cfg);
}

struct Run {
    std::optional<OrchestratorEvent> end;
};

Run serve(scenario::World& w, const std::string& name, const std::string& description, double horizon = 200) {
    Run r;
    w.start();
    w.clock().post_at(1.0, [&] {
        w.client().dispatch(TaskStar::from_spec(TaskSpec{"T", name, description, {}, "dev"}),
                            [&](OrchestratorEvent e) { r.end = e; });
    });
    w.clock().run(horizon);
    return r;
}

// Step count of a script: rules keyed by step, replayed until a terminal state.
int replay_rounds(const Json& script) {
    int step = 1;
    for (;;) {
        const Json* hit = nullptr;
        for (const auto& rule : script["rules"])
            if (!rule.contains("step") || rule["step"] == step) {
                hit = &rule;
                break;
            }
        if (!hit || hit->value("next_state", "FINISH") != "CONTINUE") return step;
        ++step;
    }
}

const Json kExec = Json::parse(R"({"strict": true, "entries": [
    {"pattern": "bash run.sh", "stdout": "wrote out.txt\n", "duration": 3},
    {"pattern": "cat out.txt", "stdout": "42\n", "duration": 1},
    {"pattern": "false", "status": 1}]})");

}  // namespace

// ---------------------------------------------------------------------------
// FSM

TEST_CASE("fsm_step") {
    auto s = fsm_step(AgentState::Continue, AgentState::Finish);
    CHECK(s.next == AgentState::Finish);
    CHECK(s.round_end);
    s = fsm_step(AgentState::Continue, AgentState::Continue);
    CHECK(s.next == AgentState::Continue);
    CHECK_FALSE(s.round_end);
    s = fsm_step(AgentState::Continue, AgentState::Fail);
    CHECK(s.round_end);
    CHECK(code_of([] { fsm_step(AgentState::Finish, AgentState::Continue); }) == ErrorCode::IllegalTransition);
    CHECK(code_of([] { fsm_step(AgentState::Fail, AgentState::Finish); }) == ErrorCode::IllegalTransition);
}

TEST_CASE("state and strategy names") {
    CHECK(parse_agent_state("CONTINUE") == AgentState::Continue);
    CHECK_FALSE(parse_agent_state("DONE"));
    CHECK(parse_strategy("MEMORY_UPDATE") == StrategyKind::MemoryUpdate);
    CHECK(kLinuxPipeline.size() == 3);
    CHECK(kLinuxPipeline.front() == StrategyKind::LlmInteraction);
}

// ---------------------------------------------------------------------------
// Executors

TEST_CASE("scripted EXEC_CLI") {
    auto ex = table();
    auto r = ex.execute(cli("echo hi"));
    CHECK(r.status == "OK");
    CHECK(r.value["exit_code"] == 0);
    CHECK(r.value["stdout"] == "hi\n");
    CHECK(r.value["stderr"] == "");
    CHECK(ex.execute(cli("bash long_job.sh")).duration == 30);
    auto bad = ex.execute(cli("false"));
    CHECK(bad.status == "ERROR");
    CHECK(bad.value["stderr"] == "nope");
    CHECK(code_of([&] { ex.execute(cli("rm -rf /")); }) == ErrorCode::NoScriptEntry);
    CHECK(code_of([&] { ex.execute({"a1", "DRAW", Json::object()}); }) == ErrorCode::NoScriptEntry);
}

TEST_CASE("non-strict executor answers unknown commands with an empty success") {
    ScriptedExecutor ex({}, Json::object(), false);
    auto r = ex.execute(cli("anything"));
    CHECK(r.status == "OK");
    CHECK(r.duration == 0);
}

TEST_CASE("SYS_INFO returns the telemetry snapshot") {
    auto ex = table();
    auto a = ex.execute({"a1", "SYS_INFO", Json::object()});
    CHECK(a.value["cpu_cores"] == 96);
    CHECK(a.value["memory_gb"] == 866.1);
    CHECK(a.value["gpus"].size() == 4);
    CHECK(ex.execute({"a1", "SYS_INFO", Json::object()}).value == a.value);

    ScriptedExecutor minimal({}, {{"os", "linux"}});
    auto m = minimal.execute({"a1", "SYS_INFO", Json::object()});
    CHECK(m.value == Json{{"os", "linux"}});
}

TEST_CASE("executor table errors") {
    CHECK(code_of([] { ScriptedExecutor::from_json(Json::array(), {}); }) == ErrorCode::ParseError);
    CHECK(code_of([] { ScriptedExecutor::from_json({{"entries", {{{"status", 0}}}}}, {}); }) ==
          ErrorCode::ParseError);
    CHECK(code_of([] { ScriptedExecutor::from_json({{"entries", {{{"pattern", "x"}, {"duration", -1}}}}}, {}); }) ==
          ErrorCode::ParseError);
}

// ---------------------------------------------------------------------------
// Reasoner

TEST_CASE("reasoner rules match by task glob and step") {
    auto script = load_reasoner_script(Json::parse(R"({"rules": [
        {"task": "job@*", "step": 1, "commands": [{"function": "EXEC_CLI", "arguments": {"command": "run ${task.id}"}}],
         "next_state": "CONTINUE"},
        {"task": "job@*", "commands": [], "next_state": "FINISH", "summary": "done ${task.name}"}]})"));
    ScriptedReasoner r(script);
    Json t{{"id", "T1"}, {"name", "job@linux"}, {"description", "d"}};
    auto d1 = r.decide({t, 1, nullptr});
    REQUIRE(d1.commands.size() == 1);
    CHECK(d1.commands[0].id == "a1");
    CHECK(d1.commands[0].arguments["command"] == "run T1");
    CHECK(d1.next_state == AgentState::Continue);
    auto d2 = r.decide({t, 2, nullptr});
    CHECK(d2.commands.empty());
    CHECK(d2.summary == "done job@linux");
    CHECK(code_of([&] { r.decide({Json{{"name", "other"}}, 1, nullptr}); }) == ErrorCode::NoScriptEntry);
}

TEST_CASE("non-strict reasoner runs the description") {
    ScriptedReasoner r(load_reasoner_script({{"strict", false}}));
    auto d = r.decide({Json{{"name", "x"}, {"description", "make all"}}, 1, nullptr});
    REQUIRE(d.commands.size() == 1);
    CHECK(d.commands[0].function == "EXEC_CLI");
    CHECK(d.commands[0].arguments["command"] == "make all");
    CHECK(d.next_state == AgentState::Finish);
    CHECK(d.on_error == AgentState::Fail);
}

TEST_CASE("reasoner script errors") {
    CHECK(code_of([] { load_reasoner_script(Json::array()); }) == ErrorCode::ParseError);
    CHECK(code_of([] { load_reasoner_script({{"rules", {{{"next_state", "MAYBE"}}}}}); }) == ErrorCode::ParseError);
}

// ---------------------------------------------------------------------------
// Serving tasks

TEST_CASE("a scripted 2-step task completes in 2 rounds") {
    auto script = Json::parse(R"({"rules": [
        {"step": 1, "commands": [{"function": "EXEC_CLI", "arguments": {"command": "bash run.sh"}}],
         "next_state": "CONTINUE"},
        {"step": 2, "commands": [{"function": "EXEC_CLI", "arguments": {"command": "cat out.txt"}}],
         "next_state": "FINISH", "summary": "answer is 42"}]})");
    auto w = make_world(script, kExec);
    auto r = serve(w, "compute", "run the script and read its output");
    REQUIRE(r.end);
    CHECK(r.end->kind == EventKind::TaskCompleted);
    const auto& res = *r.end->payload;
    CHECK(res["steps"] == replay_rounds(script));
    CHECK(res["summary"] == "answer is 42");
    REQUIRE(res["outputs"].size() == 2);
    CHECK(res["outputs"][1]["stdout"] == "42\n");
    auto& srv = w.server("dev");
    REQUIRE(srv.served().size() == 1);
    CHECK(srv.served()[0].steps == 2);
    CHECK(w.device_client("dev").commands_run() == 2);
    CHECK(srv.memory().size() == 2);
}

TEST_CASE("FAIL on the first step issues no commands") {
    auto script = Json::parse(R"({"rules": [
        {"commands": [], "next_state": "FAIL", "reason": "precondition missing: no GPU"}]})");
    auto w = make_world(script, kExec);
    auto r = serve(w, "train", "train the model");
    REQUIRE(r.end);
    CHECK(r.end->kind == EventKind::TaskFailed);
    CHECK(r.end->payload->at("error") == "precondition missing: no GPU");
    CHECK(r.end->failure_reason == FailureReason::ExecutionError);
    CHECK(w.device_client("dev").commands_run() == 0);
    for (const auto& rec : w.network().wire_log()) CHECK(rec.label != "COMMAND");
}

TEST_CASE("an empty description fails with EXECUTION_ERROR") {
    auto w = make_world({{"strict", false}}, kExec);
    auto r = serve(w, "blank", "");
    REQUIRE(r.end);
    CHECK(r.end->kind == EventKind::TaskFailed);
    CHECK(r.end->failure_reason == FailureReason::ExecutionError);
    CHECK(w.device_client("dev").commands_run() == 0);
}

TEST_CASE("a task reaching a server without a client fails with AGENT_DISCONNECTED") {
    sim::VirtualClock clock;
    sim::Network net(clock, 0);
    net.add_link({"up", "dev", {0.001, 0.001}, {}});
    aip::SimTransport tu(net, "up"), td(net, "dev");
    DeviceAgentServer srv(clock, td, Json::object(),
                          std::make_shared<ScriptedReasoner>(load_reasoner_script({{"strict", false}})));
    srv.start();
    aip::Endpoint up(tu);
    std::vector<aip::body::TaskEnd> ends;
    up.on_message([&](const aip::NodeId&, const aip::AipMessage& m, bool) {
        if (auto* e = std::get_if<aip::body::TaskEnd>(&m.body)) ends.push_back(*e);
    });
    up.send("dev", aip::body::DeviceInfoRequest{"dev", "info-1"}, std::string("s1"));
    up.send("dev", aip::body::Task{"req-1", "T", "echo hi", {{"description", "echo hi"}}}, std::string("s1"));
    clock.run(5);
    REQUIRE(ends.size() == 1);
    CHECK(ends[0].status == "FAILED");
    CHECK(ends[0].failure_reason == "AGENT_DISCONNECTED");
    CHECK(ends[0].error->find("ClientUnavailable") != std::string::npos);
    CHECK_FALSE(srv.client_registered());
}

TEST_CASE("the step limit ends a looping task with TIMEOUT") {
    auto script = Json::parse(R"({"rules": [
        {"commands": [{"function": "EXEC_CLI", "arguments": {"command": "cat out.txt"}}],
         "next_state": "CONTINUE"}]})");
    auto w = make_world(script, kExec);
    auto r = serve(w, "loop", "poll forever", 500);
    REQUIRE(r.end);
    CHECK(r.end->kind == EventKind::TaskFailed);
    CHECK(r.end->failure_reason == FailureReason::Timeout);
    CHECK(r.end->payload->at("error").get<std::string>().find("StepLimitExceeded") != std::string::npos);
    CHECK(w.device_client("dev").commands_run() == 25);
}

TEST_CASE("on_error replaces the next state when a command fails") {
    auto script = Json::parse(R"({"rules": [
        {"commands": [{"function": "EXEC_CLI", "arguments": {"command": "false"}}],
         "next_state": "FINISH", "on_error": "FAIL", "reason": "command failed"}]})");
    auto w = make_world(script, kExec);
    auto r = serve(w, "t", "run false");
    REQUIRE(r.end);
    CHECK(r.end->kind == EventKind::TaskFailed);
    CHECK(r.end->payload->at("error") == "command failed");
}

TEST_CASE("strategies run once per round in configured order") {
    auto script = Json::parse(R"({"rules": [
        {"step": 1, "commands": [{"function": "EXEC_CLI", "arguments": {"command": "bash run.sh"}}],
         "next_state": "CONTINUE"},
        {"step": 2, "commands": [], "next_state": "CONTINUE"},
        {"step": 3, "commands": [{"function": "EXEC_CLI", "arguments": {"command": "cat out.txt"}}],
         "next_state": "FINISH"}]})");
    for (const auto& order : {kLinuxPipeline, std::vector<StrategyKind>{StrategyKind::DataCollection,
                                                                         StrategyKind::LlmInteraction,
                                                                         StrategyKind::ActionExecution,
                                                                         StrategyKind::MemoryUpdate}}) {
        auto w = make_world(script, kExec, true, order);
        auto r = serve(w, "t", "three rounds");
        REQUIRE(r.end);
        CHECK(r.end->kind == EventKind::TaskCompleted);
        const auto& trace = w.server("dev").strategy_trace();
        REQUIRE(trace.size() == 3 * order.size());
        for (std::size_t i = 0; i < trace.size(); ++i) {
            CHECK(trace[i].first == static_cast<int>(i / order.size()) + 1);
            CHECK(trace[i].second == order[i % order.size()]);
        }
    }
}

TEST_CASE("memory grows on every round that issues commands") {
    auto script = Json::parse(R"({"rules": [
        {"step": 1, "commands": [{"function": "EXEC_CLI", "arguments": {"command": "bash run.sh"}}],
         "next_state": "CONTINUE"},
        {"step": 2, "commands": [{"function": "EXEC_CLI", "arguments": {"command": "cat out.txt"}}],
         "next_state": "CONTINUE"},
        {"step": 3, "commands": [{"function": "SYS_INFO"}], "next_state": "FINISH"}]})");
    auto w = make_world(script, kExec);
    w.start();
    bool done = false;
    w.clock().post_at(1.0, [&] {
        w.client().dispatch(TaskStar::from_spec(TaskSpec{"T", "t", "d", {}, "dev"}),
                            [&](OrchestratorEvent) { done = true; });
    });
    std::vector<std::size_t> sizes;
    while (!done && w.clock().step()) {
        auto n = w.server("dev").memory().size();
        if (sizes.empty() || sizes.back() != n) sizes.push_back(n);
    }
    REQUIRE(done);
    CHECK(sizes == std::vector<std::size_t>{0, 1, 2, 3});
    const auto& e = w.server("dev").memory().entries();
    for (std::size_t i = 0; i < e.size(); ++i) CHECK(e[i].step == static_cast<int>(i) + 1);
}

TEST_CASE("a batch reports each action in order, including partial failure") {
    auto script = Json::parse(R"({"rules": [
        {"commands": [{"function": "SYS_INFO"}, {"function": "EXEC_CLI", "arguments": {"command": "false"}}],
         "next_state": "FINISH"}]})");
    auto w = make_world(script, kExec);
    auto r = serve(w, "t", "two actions");
    REQUIRE(r.end);
    std::optional<aip::body::CommandResults> results;
    for (const auto& rec : w.network().wire_log())
        if (rec.label == "COMMAND_RESULTS") results = std::get<aip::body::CommandResults>(aip::decode(rec.bytes).body);
    REQUIRE(results);
    REQUIRE(results->action_results.size() == 2);
    CHECK(results->action_results[0].id == "a1");
    CHECK(results->action_results[0].status == "OK");
    CHECK(results->action_results[1].id == "a2");
    CHECK(results->action_results[1].status == "ERROR");
    CHECK(results->action_results[1].error.has_value());
}

TEST_CASE("every served task ends in exactly one TASK_END and the client decides nothing") {
    auto w = make_world({{"strict", false}}, kExec);
    w.start();
    int ends = 0;
    w.clock().post_at(1.0, [&] {
        for (const auto* id : {"T1", "T2", "T3"})
            w.client().dispatch(TaskStar::from_spec(TaskSpec{id, id, "cat out.txt", {}, "dev"}),
                                [&](OrchestratorEvent) { ++ends; });
    });
    w.clock().run(60);
    CHECK(ends == 3);
    std::size_t task_ends = 0;
    for (const auto& rec : w.network().wire_log()) task_ends += rec.label == "TASK_END";
    CHECK(task_ends == 3);
    CHECK(aip::check_wire(w.network().wire_log(), w.clock().now()).ok());
    CHECK(w.device_client("dev").state_transitions() == 0);
}
