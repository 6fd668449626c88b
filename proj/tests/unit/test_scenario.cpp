#include <doctest.h>

#include <filesystem>

#include "constellation/error.hpp"
#include "constellation/scenario/markdown.hpp"
#include "constellation/scenario/metrics.hpp"
#include "constellation/scenario/scenario.hpp"
#include "helpers.hpp"

using namespace constellation;
using namespace constellation::scenario;

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

TaskConstellation chain(int n) {
    BuildConfig cfg;
    for (int i = 0; i < n; ++i) cfg.tasks.push_back({testutil::tid(i), testutil::tid(i), "", {}, "d"});
    for (int i = 1; i < n; ++i)
        cfg.dependencies.push_back({"e" + std::to_string(i), testutil::tid(i - 1), testutil::tid(i),
                                    DependencyType::unconditional(), ""});
    return build_constellation(cfg, true, TaskConstellation("chain"));
}

// Oracle view of a constellation: index by sorted id.
struct Indexed {
    int n = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<double> dur;
};

Indexed index(const TaskConstellation& c, const std::map<TaskId, double>& d) {
    Indexed out;
    std::map<TaskId, int> at;
    for (const auto& [id, t] : c.tasks()) {
        at[id] = out.n++;
        out.dur.push_back(d.count(id) ? d.at(id) : 0.0);
    }
    for (const auto& [id, e] : c.edges()) out.edges.emplace_back(at[e.from_task], at[e.to_task]);
    return out;
}

ScenarioSpec numbered(int n) {
    return load_scenario(testutil::source_path("scenarios/scenario" + std::to_string(n) + ".json"));
}

}  // namespace

// ---------------------------------------------------------------------------
// Metrics

TEST_CASE("fig4 with 10 s tasks agrees with the brute-force oracle") {
    auto c = testutil::fig4();
    std::map<TaskId, double> d;
    for (const auto& [id, t] : c.tasks()) d[id] = 10.0;
    auto m = compute_metrics(c, d);
    auto ix = index(c, d);
    CHECK(m.total_work == 50.0);
    CHECK(m.critical_path == oracle::longest_path(ix.n, ix.edges, ix.dur));
    CHECK(m.max_parallel_width == oracle::list_schedule_width(ix.n, ix.edges, ix.dur));
    CHECK(m.max_parallel_width == 2);
    CHECK(m.parallelism_ratio == doctest::Approx(m.total_work / m.critical_path).epsilon(1e-12));
}

TEST_CASE("metrics edge cases") {
    TaskConstellation empty("none");
    auto m = compute_metrics(empty, {});
    CHECK(m.total_work == 0);
    CHECK(m.critical_path == 0);
    CHECK(m.parallelism_ratio == 0);
    CHECK(m.max_parallel_width == 0);

    // Back-to-back intervals do not overlap.
    auto c = chain(3);
    m = compute_metrics(c, {{"t0", 2}, {"t1", 3}, {"t2", 4}});
    CHECK(m.critical_path == 9);
    CHECK(m.max_parallel_width == 1);
    CHECK(m.parallelism_ratio == 1);

    // Zero-length tasks never count as running.
    BuildConfig cfg;
    cfg.tasks = {{"a", "a", "", {}, "d"}, {"b", "b", "", {}, "d"}, {"z", "z", "", {}, "d"}};
    auto wide = build_constellation(cfg, true, TaskConstellation("w"));
    m = compute_metrics(wide, {{"a", 1}, {"b", 1}});
    CHECK(m.max_parallel_width == 2);
    CHECK(m.total_work == 2);
    CHECK(m.parallelism_ratio == 2);
}

TEST_CASE("metrics of a run need every task terminal") {
    RunReport r;
    auto c = chain(2);
    CHECK(code_of([&] { compute_metrics(r, c); }) == ErrorCode::IncompleteRun);
}

TEST_CASE("metrics agree with the oracle on random DAGs") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 300; ++i) {
        auto g = oracle::random_dag(rng, 7);
        ConditionRegistry reg;
        auto c = testutil::to_constellation(g, reg);
        std::map<TaskId, double> d;
        for (const auto& [id, t] : c.tasks()) d[id] = std::uniform_int_distribution<int>(0, 4)(rng) * 1.5;
        auto ix = index(c, d);
        auto m = compute_metrics(c, d);
        CHECK(m.critical_path == doctest::Approx(oracle::longest_path(ix.n, ix.edges, ix.dur)).epsilon(1e-12));
        CHECK(m.max_parallel_width == oracle::list_schedule_width(ix.n, ix.edges, ix.dur));
    }
}

// ---------------------------------------------------------------------------
// Text helpers

TEST_CASE("count_timings and count_failure_traces") {
    CHECK(count_timings("- A: ran 30.5 s\n- B: ran 12 s\nno time here\n- C: 4.0s\n") == 2);
    CHECK(count_timings("") == 0);
    CHECK(count_failure_traces("A: 30 s\nB FAILED: disconnected\nC: ok\n") == 1);
}

TEST_CASE("mermaid uses one arrow style per dependency type") {
    auto text = mermaid(testutil::fig4());
    CHECK(text.find("graph TD") != std::string::npos);
    CHECK(text.find("-->") != std::string::npos);
    CHECK(text.find("==>") != std::string::npos);
}

// ---------------------------------------------------------------------------
// Scenario files

TEST_CASE("loading scenarios") {
    auto s = numbered(1);
    CHECK(s.name == "scenario1");
    CHECK(s.world.devices.size() == 4);
    CHECK(s.world.outages.at("linux1").size() == 1);
    CHECK(code_of([] { load_scenario("/nonexistent/scenario.json"); }) == ErrorCode::ParseError);
    auto fleet = default_fleet(testutil::fig4());
    CHECK_FALSE(fleet.empty());
}

TEST_CASE("scenario 1: the retry completes and the run succeeds") {
    auto r = run_scenario(numbered(1), 0);
    CHECK_MESSAGE(r.verdict.ok(), to_json(r.verdict).dump());
    CHECK(r.report.outcome == RunOutcome::Success);
    CHECK(r.report.final_constellation.task("A_retry").status == TaskStatus::Completed);
    CHECK(r.report.final_constellation.task("A").failure_reason == FailureReason::AgentDisconnected);
    CHECK(r.wire.ok());
    // linux1 came back through the backoff loop.
    REQUIRE_FALSE(r.reconnects.empty());
    CHECK(r.reconnects.back().success);
    CHECK(r.report.checks.total() == 0);
}

TEST_CASE("scenario 2: one failure trace reaches the report") {
    auto r = run_scenario(numbered(2), 0);
    CHECK_MESSAGE(r.verdict.ok(), to_json(r.verdict).dump());
    CHECK(r.report.outcome == RunOutcome::Partial);
    CHECK(count_failure_traces(r.report.final_constellation.task("D").description) == 1);
    CHECK(r.wire.ok());
}

TEST_CASE("scenario 3: nothing is aggregated") {
    auto r = run_scenario(numbered(3), 0);
    CHECK_MESSAGE(r.verdict.ok(), to_json(r.verdict).dump());
    CHECK(r.report.outcome == RunOutcome::Failed);
    CHECK(r.report.dispatch_counts.count("D") == 0);
    CHECK(count_timings(r.report.final_constellation.task("D").description) == 0);
    CHECK(r.report.final_constellation.task("D").status == TaskStatus::Failed);
}

TEST_CASE("scenario runs match the golden logs") {
    for (int n : {1, 2, 3}) {
        auto r = run_scenario(numbered(n), 0);
        auto base = "tests/golden/scenario" + std::to_string(n);
        CHECK_MESSAGE(report_text(r.report) == testutil::read_file(testutil::source_path(base + ".report.json")),
                      "scenario " << n);
        CHECK_MESSAGE(r.markdown == testutil::read_file(testutil::source_path(base + ".log.md")), "scenario " << n);
    }
}

TEST_CASE("a wrong expectation is reported as a verdict diff") {
    auto s = numbered(1);
    s.expect["outcome"] = "FAILED";
    s.expect["result_timings"] = 7;
    auto r = run_scenario(s, 0);
    CHECK_FALSE(r.verdict.ok());
    CHECK(r.verdict.diffs.size() == 2);
}

TEST_CASE("seeds change timings but not verdicts") {
    for (int n : {1, 2, 3})
        for (std::uint64_t seed : {1, 2, 3, 42}) {
            auto r = run_scenario(numbered(n), seed);
            CHECK_MESSAGE(r.verdict.ok(), "scenario " << n << " seed " << seed << ": " << to_json(r.verdict).dump());
        }
}

TEST_CASE("an ad-hoc constellation runs on the default fleet") {
    ScenarioSpec s;
    s.name = "fig4";
    s.constellation = testutil::fig4();
    s.world.devices = default_fleet(s.constellation);
    auto r = run_scenario(s, 0);
    CHECK(r.report.outcome == RunOutcome::Success);
    REQUIRE(r.metrics);
    CHECK(r.metrics->max_parallel_width == 2);
    CHECK(r.wire.ok());
}
