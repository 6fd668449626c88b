#pragma once

#include <optional>
#include <string>
#include <vector>

#include "constellation/aip/checks.hpp"
#include "constellation/orchestrator/orchestrator.hpp"
#include "constellation/scenario/metrics.hpp"
#include "constellation/scenario/world.hpp"

namespace constellation::scenario {

struct ScenarioSpec {
    std::string name;
    std::string title;
    TaskConstellation constellation;
    Json planner_script = Json::object();
    WorldConfig world;
    OrchestratorConfig orchestrator;
    Json expect = Json::object();
};

// Reads a scenario file. Referenced files resolve against its directory.
// Throws ParseError.
ScenarioSpec load_scenario(const std::string& path);

// Loads a fleet document: {"devices": [...]}; executor and reasoner may be
// inline objects or file names relative to `dir`.
std::vector<DeviceSpec> load_fleet(const Json& doc, const std::string& dir);

// One device per distinct task device, non-strict reasoner and executor.
std::vector<DeviceSpec> default_fleet(const TaskConstellation& c);

struct VerdictDiff {
    std::string check;
    Json expected;
    Json actual;
};

struct Verdict {
    std::vector<VerdictDiff> diffs;
    bool ok() const { return diffs.empty(); }
};

Json to_json(const Verdict& v);

// Checks the run against an expectation block: outcome, planner_state,
// status, spawned, dispatches, result_timings, failure_traces, finished_by.
Verdict check_verdict(const RunReport& r, const Json& expect);

// Lines of the form "<number> s" in a text.
int count_timings(const std::string& text);
// Lines mentioning FAILED in a text.
int count_failure_traces(const std::string& text);

struct ScenarioResult {
    RunReport report;
    std::optional<ParallelismMetrics> metrics;
    aip::WireCheck wire;
    Verdict verdict;
    std::string markdown;
    std::vector<aip::ReconnectAttempt> reconnects;
    std::vector<sim::WireRecord> wire_log;
};

ScenarioResult run_scenario(const ScenarioSpec& spec, std::uint64_t seed);

// Canonical text of the report, used for determinism comparisons.
std::string report_text(const RunReport& r);

}  // namespace constellation::scenario
