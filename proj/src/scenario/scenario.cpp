#include "constellation/scenario/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "constellation/core/serialize.hpp"
#include "constellation/error.hpp"
#include "constellation/planner/script.hpp"
#include "constellation/scenario/markdown.hpp"

namespace constellation::scenario {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void parse_fail(const std::string& what) {
    throw Error(ErrorCode::ParseError, what);
}

Json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) parse_fail("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return Json::parse(ss.str());
    } catch (const Json::parse_error& e) {
        parse_fail(path + ": " + e.what());
    }
}

// Inline object, or a file name relative to `dir`.
Json inline_or_file(const Json& v, const std::string& dir, const std::string& what) {
    if (v.is_object()) return v;
    if (v.is_string()) return read_json((fs::path(dir) / v.get<std::string>()).string());
    parse_fail("'" + what + "' must be an object or a file name");
}

sim::Latency latency_from(const Json& j) {
    if (j.is_number()) return {j.get<double>(), j.get<double>()};
    if (!j.is_object()) parse_fail("latency must be a number or {lo, hi}");
    return {j.value("lo", 0.0), j.value("hi", j.value("lo", 0.0))};
}

}  // namespace

std::vector<DeviceSpec> load_fleet(const Json& doc, const std::string& dir) {
    if (!doc.is_object() || !doc.contains("devices") || !doc["devices"].is_array())
        parse_fail("fleet needs a 'devices' array");
    std::vector<DeviceSpec> out;
    for (const auto& d : doc["devices"]) {
        if (!d.is_object() || !d.contains("id") || !d["id"].is_string()) parse_fail("every device needs a string 'id'");
        DeviceSpec s;
        s.id = d["id"].get<std::string>();
        s.user_config = d.value("user_config", Json::object());
        s.manifest = d.value("manifest", Json::object());
        s.telemetry = d.value("telemetry", Json::object());
        if (d.contains("executor")) s.executor = inline_or_file(d["executor"], dir, "executor");
        if (d.contains("reasoner")) s.reasoner = inline_or_file(d["reasoner"], dir, "reasoner");
        if (d.contains("strategies")) {
            s.server.strategies.clear();
            for (const auto& k : d["strategies"]) {
                auto st = k.is_string() ? agent::parse_strategy(k.get<std::string>()) : std::nullopt;
                if (!st) parse_fail("unknown strategy for device '" + s.id + "'");
                s.server.strategies.push_back(*st);
            }
        }
        s.server.step_limit = d.value("step_limit", s.server.step_limit);
        s.server.reasoning_latency = d.value("reasoning_latency", s.server.reasoning_latency);
        if (d.contains("local_latency")) s.local = latency_from(d["local_latency"]);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<DeviceSpec> default_fleet(const TaskConstellation& c) {
    std::set<DeviceId> ids;
    for (const auto& [id, t] : c.tasks()) ids.insert(t.device);
    std::vector<DeviceSpec> out;
    for (const auto& d : ids) {
        DeviceSpec s;
        s.id = d;
        s.telemetry = Json{{"os", "unknown"}};
        s.executor = Json{{"strict", false}};
        s.reasoner = Json{{"strict", false}};
        out.push_back(std::move(s));
    }
    return out;
}

ScenarioSpec load_scenario(const std::string& path) {
    auto doc = read_json(path);
    if (!doc.is_object()) parse_fail(path + ": scenario must be an object");
    auto dir = fs::path(path).parent_path().string();
    ScenarioSpec s;
    s.name = doc.value("name", fs::path(path).stem().string());
    s.title = doc.value("title", "");
    if (!doc.contains("constellation")) parse_fail(path + ": missing 'constellation'");
    s.constellation = deserialize(inline_or_file(doc["constellation"], dir, "constellation"));
    if (doc.contains("planner_script")) s.planner_script = inline_or_file(doc["planner_script"], dir, "planner_script");
    load_script_json(s.planner_script);  // fail early on a bad script

    s.world.devices = doc.contains("fleet") ? load_fleet(inline_or_file(doc["fleet"], dir, "fleet"), dir)
                                            : default_fleet(s.constellation);
    s.world.seed = doc.value("seed", 0ull);
    if (doc.contains("wan_latency")) s.world.wan = latency_from(doc["wan_latency"]);
    if (doc.contains("outages")) {
        for (const auto& o : doc["outages"]) {
            if (!o.is_object() || !o.contains("device") || !o.contains("down")) parse_fail("outage needs device and down");
            sim::Outage out;
            out.down = o["down"].get<double>();
            if (o.contains("up") && !o["up"].is_null()) out.up = o["up"].get<double>();
            s.world.outages[o["device"].get<std::string>()].push_back(out);
        }
    }
    if (doc.contains("duplicate")) s.world.duplicate_labels = doc["duplicate"].get<std::set<std::string>>();
    if (doc.contains("aip")) {
        const auto& a = doc["aip"];
        auto& hb = s.world.client.heartbeat;
        auto& bo = s.world.client.backoff;
        if (a.contains("heartbeat")) {
            hb.interval = a["heartbeat"].value("interval", hb.interval);
            hb.missed = a["heartbeat"].value("missed", hb.missed);
        }
        if (a.contains("backoff")) {
            const auto& b = a["backoff"];
            bo.base = b.value("base", bo.base);
            bo.multiplier = b.value("multiplier", bo.multiplier);
            bo.max_delay = b.value("max_delay", bo.max_delay);
            bo.max_attempts = b.value("max_attempts", bo.max_attempts);
            bo.jitter = b.value("jitter", bo.jitter);
        }
        for (auto& d : s.world.devices) d.server.heartbeat = hb;
    }
    if (doc.contains("orchestrator")) {
        const auto& o = doc["orchestrator"];
        auto& c = s.orchestrator;
        c.planner_latency = o.value("planner_latency", c.planner_latency);
        c.task_timeout = o.value("task_timeout", c.task_timeout);
        c.max_time = o.value("max_time", c.max_time);
        c.max_rejections = o.value("max_rejections", c.max_rejections);
    }
    s.expect = doc.value("expect", Json::object());
    return s;
}

int count_timings(const std::string& text) {
    static const std::regex re(R"((^|[^0-9.])[0-9]+(\.[0-9]+)? s\b)");
    int n = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (std::regex_search(line, re)) ++n;
    return n;
}

int count_failure_traces(const std::string& text) {
    int n = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (line.find("FAILED") != std::string::npos) ++n;
    return n;
}

Json to_json(const Verdict& v) {
    Json diffs = Json::array();
    for (const auto& d : v.diffs) diffs.push_back({{"check", d.check}, {"expected", d.expected}, {"actual", d.actual}});
    return Json{{"ok", v.ok()}, {"diffs", diffs}};
}

Verdict check_verdict(const RunReport& r, const Json& expect) {
    Verdict v;
    auto diff = [&](const std::string& check, const Json& want, const Json& got) {
        if (want != got) v.diffs.push_back({check, want, got});
    };
    const auto& fin = r.final_constellation;
    if (expect.contains("outcome")) diff("outcome", expect["outcome"], std::string(to_string(r.outcome)));
    if (expect.contains("planner_state"))
        diff("planner_state", expect["planner_state"], std::string(to_string(r.planner_final_state)));
    if (expect.contains("status"))
        for (const auto& [id, st] : expect["status"].items())
            diff("status." + id, st, fin.has_task(id) ? Json(std::string(to_string(fin.task(id).status))) : Json(nullptr));
    if (expect.contains("spawned"))
        for (const auto& id : expect["spawned"]) {
            auto t = id.get<std::string>();
            bool spawned = fin.has_task(t) && !r.initial.has_task(t);
            diff("spawned." + t, true, spawned);
        }
    if (expect.contains("dispatches"))
        for (const auto& [id, n] : expect["dispatches"].items()) {
            auto it = r.dispatch_counts.find(id);
            diff("dispatches." + id, n, it == r.dispatch_counts.end() ? 0 : it->second);
        }
    if (expect.contains("result_timings"))
        diff("result_timings", expect["result_timings"], count_timings(r.planner_result));
    if (expect.contains("failure_traces")) {
        const auto& ft = expect["failure_traces"];
        auto task = ft.value("task", "");
        auto text = fin.has_task(task) ? fin.task(task).description : std::string();
        diff("failure_traces." + task, ft.value("count", 0), count_failure_traces(text));
    }
    if (expect.contains("finished_by")) {
        auto limit = expect["finished_by"].get<double>();
        if (r.finished_at > limit) v.diffs.push_back({"finished_by", limit, round_time(r.finished_at)});
    }
    if (expect.value("clean_checks", true)) diff("checks.total", 0, r.checks.total());
    return v;
}

std::string report_text(const RunReport& r) {
    return to_json(r).dump(2) + "\n";
}

ScenarioResult run_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
    auto cfg = spec.world;
    cfg.seed = seed;
    World w(cfg);
    ScriptedPlanner planner(load_script_json(spec.planner_script));
    Orchestrator o(w.clock(), planner, w.client(), spec.orchestrator);
    o.on_finished([&w] { w.clock().stop(); });
    w.start();
    o.start(spec.constellation);
    while (!o.finished() && w.clock().pending() > 0) {
        w.clock().run();
        if (w.clock().stopped()) break;
    }
    ScenarioResult res;
    res.report = o.report();
    w.drain();

    auto& rep = res.report;
    for (const auto& [id, t] : rep.final_constellation.tasks())
        if (t.status == TaskStatus::Running && w.client().availability(t.device) != DeviceAvailability::Available)
            ++rep.checks.running_on_disconnected;

    res.wire = aip::check_wire(w.network().wire_log(), w.clock().now());
    res.wire_log = w.network().wire_log();
    try {
        res.metrics = compute_metrics(rep, rep.final_constellation);
    } catch (const Error&) {
        res.metrics.reset();
    }
    res.reconnects = w.client().reconnect_log();
    res.verdict = check_verdict(rep, spec.expect);

    Json reconnects = Json::array(), disconnects = Json::array(), servers = Json::object();
    for (const auto& a : res.reconnects)
        reconnects.push_back({{"device", a.device}, {"attempt", a.attempt}, {"at", round_time(a.at)}, {"success", a.success}});
    for (const auto& [d, t] : w.client().disconnects()) disconnects.push_back({{"device", d}, {"at", round_time(t)}});
    for (const auto& d : w.device_ids()) {
        Json served = Json::array();
        for (const auto& s : w.server(d).served())
            served.push_back({{"task", s.task},
                              {"session", s.session},
                              {"status", s.status},
                              {"steps", s.steps},
                              {"start", round_time(s.start)},
                              {"end", round_time(s.end)}});
        servers[d] = {{"served", served}, {"aborted", w.server(d).aborted()}};
    }
    rep.extra["scenario"] = {{"name", spec.name}, {"title", spec.title}, {"seed", seed}};
    rep.extra["aip"] = {{"disconnects", disconnects},
                        {"reconnects", reconnects},
                        {"synthesized_failures", w.client().synthesized_failures()},
                        {"tasks_sent", w.client().tasks_sent()},
                        {"profiles", w.client().profiles()},
                        {"servers", servers},
                        {"wire", aip::to_json(res.wire)}};
    rep.extra["metrics"] = res.metrics ? to_json(*res.metrics) : Json(nullptr);
    rep.extra["verdict"] = to_json(res.verdict);
    res.markdown = emit_markdown_log(rep, res.metrics);
    return res;
}

}  // namespace constellation::scenario
