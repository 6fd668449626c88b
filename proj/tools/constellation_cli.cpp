#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "constellation/aip/message.hpp"
#include "constellation/core/serialize.hpp"
#include "constellation/error.hpp"
#include "constellation/explore/explorer.hpp"
#include "constellation/planner/script.hpp"
#include "constellation/scenario/scenario.hpp"
#include "constellation/util/log.hpp"

namespace fs = std::filesystem;
using namespace constellation;

namespace {

enum Exit {
    kOk = 0,
    kInvalid = 1,
    kParse = 2,
    kPartial = 3,
    kFailed = 4,
    kVerdict = 5,
    kGolden = 6,
    kBound = 7,
    kInvariant = 8,
};

void emit(const Json& j) {
    std::cout << j.dump() << "\n";
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    if (auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
    std::ofstream out(path);
    out << text;
}

Json violations_json(const std::vector<Violation>& vs) {
    Json out = Json::array();
    for (const auto& v : vs)
        out.push_back({{"kind", to_string(v.kind)}, {"message", v.message}, {"subjects", v.subjects}});
    return out;
}

int cmd_validate(const std::string& path) {
    Json line{{"command", "validate"}, {"file", path}};
    TaskConstellation c;
    try {
        auto text = read_text(path);
        Json doc;
        try {
            doc = Json::parse(text);
        } catch (const Json::parse_error& e) {
            throw Error(ErrorCode::ParseError, e.what());
        }
        c = deserialize_unvalidated(doc);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ParseError) {
            line["valid"] = false;
            line["error"] = e.what();
            emit(line);
            return kParse;
        }
        line["valid"] = false;
        line["violations"] = violations_json(e.violations());
        emit(line);
        return kInvalid;
    }
    auto vs = validate(c);
    line["valid"] = vs.empty();
    line["tasks"] = c.tasks().size();
    line["dependencies"] = c.edges().size();
    line["violations"] = violations_json(vs);
    emit(line);
    return vs.empty() ? kOk : kInvalid;
}

struct RunArgs {
    std::string scenario;
    std::string constellation;
    std::string planner_script;
    std::string fleet;
    std::string scenarios_dir;
    std::uint64_t seed = 0;
    std::string out;
    std::string log;
    std::string wire;
    std::optional<double> planner_latency;
    std::optional<double> task_timeout;
    std::optional<double> heartbeat_interval;
    std::optional<int> heartbeat_missed;
    std::optional<double> backoff_base;
    std::optional<int> backoff_attempts;
};

int cmd_run(const RunArgs& a) {
    scenario::ScenarioSpec spec;
    try {
        if (!a.scenario.empty()) {
            auto path = a.scenario;
            if (path.find_first_not_of("0123456789") == std::string::npos)
                path = (fs::path(a.scenarios_dir) / ("scenario" + a.scenario + ".json")).string();
            spec = scenario::load_scenario(path);
        } else {
            spec.name = fs::path(a.constellation).stem().string();
            spec.constellation = deserialize_text(read_text(a.constellation));
            spec.planner_script = a.planner_script.empty() ? Json::object() : Json::parse(read_text(a.planner_script));
            load_script_json(spec.planner_script);
            if (a.fleet.empty()) {
                spec.world.devices = scenario::default_fleet(spec.constellation);
            } else {
                auto doc = Json::parse(read_text(a.fleet));
                spec.world.devices = scenario::load_fleet(doc, fs::path(a.fleet).parent_path().string());
            }
        }
    } catch (const Json::parse_error& e) {
        emit({{"command", "run"}, {"error", e.what()}, {"code", "ParseError"}});
        return kParse;
    } catch (const Error& e) {
        emit({{"command", "run"}, {"error", e.what()}, {"code", to_string(e.code())}});
        return e.code() == ErrorCode::ParseError ? kParse : kInvalid;
    }
    if (a.planner_latency) spec.orchestrator.planner_latency = *a.planner_latency;
    if (a.task_timeout) spec.orchestrator.task_timeout = *a.task_timeout;
    if (a.heartbeat_interval) spec.world.client.heartbeat.interval = *a.heartbeat_interval;
    if (a.heartbeat_missed) spec.world.client.heartbeat.missed = *a.heartbeat_missed;
    if (a.backoff_base) spec.world.client.backoff.base = *a.backoff_base;
    if (a.backoff_attempts) spec.world.client.backoff.max_attempts = *a.backoff_attempts;
    for (auto& d : spec.world.devices) d.server.heartbeat = spec.world.client.heartbeat;

    auto res = scenario::run_scenario(spec, a.seed);
    const auto& r = res.report;
    if (!a.out.empty()) write_text(a.out, scenario::report_text(r));
    if (!a.log.empty()) write_text(a.log, res.markdown);
    if (!a.wire.empty()) {
        // One line per frame; the message is decoded when it parses.
        std::string text;
        for (const auto& w : res.wire_log) {
            Json j{{"id", w.id}, {"from", w.from}, {"to", w.to}, {"sent", w.sent}, {"duplicate", w.duplicate}};
            j["delivered"] = w.delivered ? Json(*w.delivered) : Json();
            try {
                j["message"] = aip::to_json(aip::decode(w.bytes));
            } catch (const Error& e) {
                j["undecodable"] = e.what();
            }
            text += j.dump() + "\n";
        }
        write_text(a.wire, text);
    }

    Json line{{"command", "run"},
              {"scenario", spec.name},
              {"seed", a.seed},
              {"outcome", to_string(r.outcome)},
              {"planner_state", to_string(r.planner_final_state)},
              {"finished_at", round_time(r.finished_at)},
              {"tasks", r.final_constellation.tasks().size()},
              {"edit_cycles", r.edit_cycles.size()},
              {"checks", r.checks.total()},
              {"wire_ok", res.wire.ok()},
              {"verdict", scenario::to_json(res.verdict)}};
    line["metrics"] = res.metrics ? scenario::to_json(*res.metrics) : Json(nullptr);
    emit(line);
    if (!res.verdict.ok()) return kVerdict;
    switch (r.outcome) {
        case RunOutcome::Success: return kOk;
        case RunOutcome::Partial: return kPartial;
        case RunOutcome::Failed:  return kFailed;
    }
    return kFailed;
}

int cmd_explore(const std::string& mode, std::uint64_t max_states, bool check_golden, const std::string& report) {
    try {
        if (mode == "extended") {
            auto st = explore::explore_extended(max_states);
            auto j = explore::to_json(st);
            if (!report.empty()) write_text(report, j.dump(2) + "\n");
            emit(Json{{"command", "explore"}, {"mode", mode}, {"distinct_states", st.distinct_states},
                      {"states_generated", st.states_generated}, {"bfs_depth", st.bfs_depth},
                      {"violations", st.violations}});
            return st.violations.empty() ? kOk : kInvariant;
        }
        explore::ExploreOptions opt;
        opt.max_states = max_states;
        auto st = explore::explore(opt);
        auto j = explore::to_json(st);
        if (!report.empty()) write_text(report, j.dump(2) + "\n");
        Json line{{"command", "explore"}, {"mode", mode}, {"distinct_states", st.distinct_states},
                  {"states_generated", st.states_generated}, {"bfs_depth", st.bfs_depth},
                  {"first_discovery", j["first_discovery"]}, {"violations", st.violations.size()},
                  {"deadlocks", st.deadlocks}};
        if (!st.violations.empty()) {
            line["witness"] = j["violations"][0];
            emit(line);
            return kInvariant;
        }
        if (check_golden) {
            auto diff = explore::compare_golden(st);
            line["golden"] = diff.empty() ? "match" : "mismatch";
            line["diff"] = diff;
            emit(line);
            return diff.empty() ? kOk : kGolden;
        }
        emit(line);
        return kOk;
    } catch (const Error& e) {
        emit({{"command", "explore"}, {"mode", mode}, {"error", e.what()}, {"code", to_string(e.code())}});
        return e.code() == ErrorCode::BoundExceeded ? kBound : kInvariant;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constellation orchestrator toolkit"};
    app.require_subcommand(1);
    std::string level = "warn";
    app.add_option("--log-level", level, "debug, info, warn, error or off")->envname("CONSTELLATION_LOG_LEVEL");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check a constellation file");
    validate->add_option("file", validate_path, "constellation JSON")->required();

    RunArgs ra;
    ra.scenarios_dir = std::string(CONSTELLATION_SOURCE_DIR) + "/scenarios";
    auto* run = app.add_subcommand("run", "Run a scenario or a constellation under simulation");
    auto* sc = run->add_option("--scenario", ra.scenario, "scenario number or file")->envname("CONSTELLATION_SCENARIO");
    auto* cn = run->add_option("--constellation", ra.constellation, "constellation file")
                   ->envname("CONSTELLATION_CONSTELLATION");
    sc->excludes(cn);
    run->add_option("--planner-script", ra.planner_script, "planner script for --constellation")
        ->envname("CONSTELLATION_PLANNER_SCRIPT");
    run->add_option("--fleet", ra.fleet, "fleet file for --constellation")->envname("CONSTELLATION_FLEET");
    run->add_option("--scenarios-dir", ra.scenarios_dir, "where numbered scenarios live")
        ->envname("CONSTELLATION_SCENARIOS_DIR");
    run->add_option("--seed", ra.seed, "run seed")->required()->envname("CONSTELLATION_SEED");
    run->add_option("--out", ra.out, "write the run report JSON here")->envname("CONSTELLATION_OUT");
    run->add_option("--log", ra.log, "write the Markdown run log here")->envname("CONSTELLATION_LOG");
    run->add_option("--wire", ra.wire, "write every frame as a JSON line here")->envname("CONSTELLATION_WIRE");
    run->add_option("--planner-latency", ra.planner_latency)->envname("CONSTELLATION_PLANNER_LATENCY");
    run->add_option("--task-timeout", ra.task_timeout)->envname("CONSTELLATION_TASK_TIMEOUT");
    run->add_option("--heartbeat-interval", ra.heartbeat_interval)->envname("CONSTELLATION_HEARTBEAT_INTERVAL");
    run->add_option("--heartbeat-missed", ra.heartbeat_missed)->envname("CONSTELLATION_HEARTBEAT_MISSED");
    run->add_option("--backoff-base", ra.backoff_base)->envname("CONSTELLATION_BACKOFF_BASE");
    run->add_option("--backoff-attempts", ra.backoff_attempts)->envname("CONSTELLATION_BACKOFF_ATTEMPTS");

    std::string mode = "tla-mirror";
    std::uint64_t max_states = 1'000'000;
    bool check_golden = false;
    std::string report;
    auto* ex = app.add_subcommand("explore", "Bounded state exploration");
    ex->add_option("--mode", mode)->check(CLI::IsMember({"tla-mirror", "extended"}))->envname("CONSTELLATION_MODE");
    ex->add_option("--max-states", max_states)->envname("CONSTELLATION_MAX_STATES");
    ex->add_flag("--check-golden", check_golden)->envname("CONSTELLATION_CHECK_GOLDEN");
    ex->add_option("--report", report, "write stats JSON here")->envname("CONSTELLATION_REPORT");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help lands here too, with a zero code
        app.exit(e);
        return e.get_exit_code() == 0 ? kOk : kParse;
    }
    if (auto l = log::parse_level(level)) log::set_level(*l);

    if (*validate) return cmd_validate(validate_path);
    if (*run) {
        if (ra.scenario.empty() && ra.constellation.empty()) {
            std::cerr << "run needs --scenario or --constellation\n";
            return kParse;
        }
        return cmd_run(ra);
    }
    return cmd_explore(mode, max_states, check_golden, report);
}
