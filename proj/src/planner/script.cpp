#include "constellation/planner/script.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "constellation/core/serialize.hpp"
#include "constellation/error.hpp"
#include "constellation/util/glob.hpp"

namespace constellation {

namespace {

[[noreturn]] void bad(const std::string& what) {
    throw Error(ErrorCode::ParseError, "planner script: " + what);
}

std::string format_value(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return "";
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    if (v.is_number_float()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3f", v.get<double>());
        std::string s = buf;
        while (!s.empty() && s.back() == '0') s.pop_back();
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }
    return v.dump();
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

const Json* walk(const Json& root, const std::vector<std::string>& path, std::size_t from) {
    const Json* cur = &root;
    for (std::size_t i = from; i < path.size(); ++i) {
        if (cur->is_object() && cur->contains(path[i])) {
            cur = &(*cur)[path[i]];
        } else if (cur->is_array()) {
            char* end = nullptr;
            auto idx = std::strtoul(path[i].c_str(), &end, 10);
            if (*end != '\0' || idx >= cur->size()) return nullptr;
            cur = &(*cur)[idx];
        } else {
            return nullptr;
        }
    }
    return cur;
}

const Json* find_task(const Json* snapshot, const std::string& id) {
    if (!snapshot || !snapshot->contains("tasks")) return nullptr;
    for (const auto& t : (*snapshot)["tasks"])
        if (t.value("id", "") == id) return &t;
    return nullptr;
}

std::optional<std::string> lookup(const std::string& key, const Json* snapshot, const OrchestratorEvent* ev,
                                  const std::string& request) {
    if (key == "request") return request;
    auto parts = split(key, '.');
    if (parts[0] == "event" && ev && parts.size() >= 2) {
        const auto& f = parts[1];
        if (f == "task") return ev->task_id.value_or("");
        if (f == "kind") return std::string(to_string(ev->kind));
        if (f == "device") return ev->device.value_or("");
        if (f == "t") return format_value(round_time(ev->timestamp));
        if (f == "error") {
            if (ev->failure_reason) return std::string(to_string(*ev->failure_reason));
            if (ev->payload && ev->payload->is_object() && ev->payload->contains("error"))
                return format_value((*ev->payload)["error"]);
            return std::string{};
        }
        if (f == "result" && ev->payload) {
            const Json* v = walk(*ev->payload, parts, 2);
            if (v) return format_value(*v);
        }
        return std::nullopt;
    }
    if (parts[0] == "task" && parts.size() >= 3) {
        const Json* t = find_task(snapshot, parts[1]);
        if (!t) return std::nullopt;
        const Json* v = walk(*t, parts, 2);
        if (v) return format_value(*v);
    }
    return std::nullopt;
}

Json render_json(const Json& j, const Json* snapshot, const OrchestratorEvent* ev, const std::string& request) {
    if (j.is_string()) return render(j.get<std::string>(), snapshot, ev, request);
    if (j.is_array()) {
        Json out = Json::array();
        for (const auto& x : j) out.push_back(render_json(x, snapshot, ev, request));
        return out;
    }
    if (j.is_object()) {
        Json out = Json::object();
        for (const auto& [k, v] : j.items()) out[k] = render_json(v, snapshot, ev, request);
        return out;
    }
    return j;
}

EventPattern parse_pattern(const Json& j) {
    if (!j.is_object()) bad("event pattern must be an object");
    EventPattern p;
    for (const auto& [k, v] : j.items())
        if (k != "kind" && k != "task" && k != "min" && k != "max") bad("unknown event pattern key '" + k + "'");
    if (j.contains("kind")) {
        if (!j["kind"].is_string()) bad("pattern kind must be a string");
        p.kind = parse_event_kind(j["kind"].get<std::string>());
        if (!p.kind) bad("unknown event kind '" + j["kind"].get<std::string>() + "'");
    }
    if (j.contains("task")) {
        if (!j["task"].is_string()) bad("pattern task must be a string");
        p.task = j["task"].get<std::string>();
    }
    if (j.contains("min")) {
        if (!j["min"].is_number_integer() || j["min"].get<int>() < 0) bad("pattern min must be a non-negative integer");
        p.min = j["min"].get<int>();
    }
    if (j.contains("max")) {
        if (!j["max"].is_number_integer() || j["max"].get<int>() < p.min) bad("pattern max must be an integer >= min");
        p.max = j["max"].get<int>();
    }
    return p;
}

// Strips script-only keys so the op can be checked with the normal parser.
Json dry_op(Json op) {
    op.erase("for_each_event");
    if (op.contains("copy_from")) {
        if (!op["copy_from"].is_string()) bad("copy_from must be a string");
        op.erase("copy_from");
        if (!op.contains("task") || !op["task"].is_object()) bad("add_task with copy_from needs a task object");
    }
    if (op.contains("description_append")) {
        if (!op["description_append"].is_string()) bad("description_append must be a string");
        op.erase("description_append");
        if (!op.contains("patch")) op["patch"] = Json::object();
    }
    return op;
}

OutputTemplate parse_output(const Json& j) {
    if (!j.is_object()) bad("output must be an object");
    OutputTemplate o;
    o.observation = j.value("observation", "");
    o.thought = j.value("thought", "");
    o.result = j.value("result", "");
    auto st = parse_planner_state(j.value("next_state", "CONTINUE"));
    if (!st) bad("unknown next_state");
    o.next_state = *st;
    if (j.contains("delta")) {
        const auto& d = j["delta"];
        if (d.is_array()) {
            o.ops = d;
        } else if (d.is_object() && d.contains("ops") && d["ops"].is_array()) {
            o.ops = d["ops"];
            o.provenance = d.value("provenance", "");
        } else {
            bad("delta must be an array of ops or an object with 'ops'");
        }
    }
    for (const auto& op : o.ops) {
        if (!op.is_object()) bad("op must be an object");
        if (op.contains("for_each_event") && !op["for_each_event"].is_boolean() && !op["for_each_event"].is_object())
            bad("for_each_event must be a boolean or a filter object");
        try {
            edit_op_from_json(dry_op(op));
        } catch (const Error& e) {
            bad(e.what());
        }
    }
    return o;
}

bool event_matches(const EventPattern& p, const OrchestratorEvent& e) {
    if (p.kind && *p.kind != e.kind) return false;
    return glob_match(p.task, e.task_id.value_or(""));
}

bool state_holds(const std::vector<StateCondition>& conds, const Json* snapshot) {
    for (const auto& c : conds) {
        if (!snapshot || !snapshot->contains("tasks")) return false;
        bool any = false;
        for (const auto& t : (*snapshot)["tasks"]) {
            if (!glob_match(c.task, t.value("id", ""))) continue;
            any = true;
            if (t.value("status", "") != to_string(c.status)) return false;
        }
        if (!any) return false;
    }
    return true;
}

std::string describe_events(const std::vector<OrchestratorEvent>& events) {
    if (events.empty()) return "no new events";
    std::ostringstream os;
    os << events.size() << " event(s):";
    for (const auto& e : events) os << " " << e.task_id.value_or("-") << " " << to_string(e.kind) << ";";
    return os.str();
}

}  // namespace

std::string render(const std::string& tmpl, const Json* snapshot, const OrchestratorEvent* event,
                   const std::string& request) {
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        auto open = tmpl.find("${", i);
        if (open == std::string::npos) {
            out.append(tmpl, i, std::string::npos);
            break;
        }
        auto close = tmpl.find('}', open + 2);
        if (close == std::string::npos) {
            out.append(tmpl, i, std::string::npos);
            break;
        }
        out.append(tmpl, i, open - i);
        auto key = tmpl.substr(open + 2, close - open - 2);
        auto v = lookup(key, snapshot, event, request);
        if (v)
            out += *v;
        else
            out.append(tmpl, open, close - open + 1);
        i = close + 1;
    }
    return out;
}

std::optional<std::vector<std::size_t>> match_events(const std::vector<EventPattern>& patterns,
                                                     const std::vector<OrchestratorEvent>& events) {
    std::vector<bool> used(events.size(), false);
    std::vector<std::size_t> bound;
    for (const auto& p : patterns) {
        int n = 0;
        for (std::size_t i = 0; i < events.size(); ++i) {
            if (used[i] || !event_matches(p, events[i])) continue;
            if (p.max && n >= *p.max) break;
            used[i] = true;
            bound.push_back(i);
            ++n;
        }
        if (n < p.min) return std::nullopt;
    }
    for (bool u : used)
        if (!u) return std::nullopt;
    std::sort(bound.begin(), bound.end());
    return bound;
}

PlannerScript load_script_json(const Json& doc) {
    PlannerScript s;
    if (doc.is_null()) return s;
    if (!doc.is_object()) bad("document must be an object");
    if (doc.contains("strict")) {
        if (!doc["strict"].is_boolean()) bad("'strict' must be a boolean");
        s.strict = doc["strict"].get<bool>();
    }
    if (!doc.contains("triggers")) return s;
    if (!doc["triggers"].is_array()) bad("'triggers' must be an array");
    int idx = 0;
    for (const auto& tj : doc["triggers"]) {
        if (!tj.is_object()) bad("trigger must be an object");
        Trigger t;
        t.name = tj.value("name", "trigger" + std::to_string(idx));
        auto mode = parse_planner_mode(tj.value("mode", "EDIT"));
        if (!mode) bad("trigger '" + t.name + "': unknown mode");
        t.mode = *mode;
        if (tj.contains("request")) {
            if (!tj["request"].is_string()) bad("trigger '" + t.name + "': request must be a glob string");
            t.request = tj["request"].get<std::string>();
        }
        if (tj.contains("events")) {
            if (!tj["events"].is_array()) bad("trigger '" + t.name + "': events must be an array");
            std::vector<EventPattern> ps;
            for (const auto& p : tj["events"]) ps.push_back(parse_pattern(p));
            t.events = std::move(ps);
        }
        if (tj.contains("state")) {
            if (!tj["state"].is_array()) bad("trigger '" + t.name + "': state must be an array");
            for (const auto& c : tj["state"]) {
                if (!c.is_object() || !c.contains("task") || !c.contains("status"))
                    bad("trigger '" + t.name + "': state entries need task and status");
                auto st = parse_task_status(c["status"].get<std::string>());
                if (!st) bad("trigger '" + t.name + "': unknown status");
                t.state.push_back({c["task"].get<std::string>(), *st});
            }
        }
        if (!tj.contains("output")) bad("trigger '" + t.name + "' has no output");
        try {
            t.output = parse_output(tj["output"]);
        } catch (const Error& e) {
            bad("trigger '" + t.name + "': " + e.what());
        }
        s.triggers.push_back(std::move(t));
        ++idx;
    }
    return s;
}

PlannerScript load_script(const std::string& text) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return {};
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        bad(e.what());
    }
    return load_script_json(doc);
}

PlannerScript load_script_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open planner script " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_script(ss.str());
}

PlannerOutput ScriptedPlanner::create(const PlannerInput& in) {
    if (in.mode != PlannerMode::Create) throw Error(ErrorCode::InvalidDelta, "create() called with EDIT input");
    auto out = respond(in);
    bool build = out.delta.ops.size() == 1 && std::holds_alternative<op::BuildConstellation>(out.delta.ops[0]);
    bool adds = true;
    for (const auto& o : out.delta.ops)
        if (!std::holds_alternative<op::AddTask>(o) && !std::holds_alternative<op::AddDependency>(o)) adds = false;
    if (!build && !adds) throw Error(ErrorCode::InvalidDelta, "CREATE delta must be one build op or only add ops");
    return out;
}

PlannerOutput ScriptedPlanner::edit(const PlannerInput& in) {
    if (in.mode != PlannerMode::Edit) throw Error(ErrorCode::InvalidDelta, "edit() called with CREATE input");
    return respond(in);
}

PlannerOutput ScriptedPlanner::respond(const PlannerInput& in) {
    const Json* snap = in.snapshot ? &*in.snapshot : nullptr;
    for (const auto& t : script_.triggers) {
        if (t.mode != in.mode) continue;
        if (t.request && !glob_match(*t.request, in.request)) continue;
        std::vector<std::size_t> bound;
        if (t.events) {
            auto m = match_events(*t.events, in.events);
            if (!m) continue;
            bound = *m;
        } else {
            for (std::size_t i = 0; i < in.events.size(); ++i) bound.push_back(i);
        }
        if (!state_holds(t.state, snap)) continue;

        fired_.push_back(t.name);
        const OrchestratorEvent* first = bound.empty() ? nullptr : &in.events[bound.front()];
        PlannerOutput out;
        out.next_state = t.output.next_state;
        out.observation = render(t.output.observation, snap, first, in.request);
        out.thought = render(t.output.thought, snap, first, in.request);
        out.result = render(t.output.result, snap, first, in.request);
        out.delta.provenance = t.output.provenance.empty() ? "script:" + t.name : t.output.provenance;

        std::map<std::string, std::string> desc;  // working descriptions
        Json added = Json::object();               // tasks added earlier in this delta
        auto current_desc = [&](const std::string& id) -> std::string {
            if (auto it = desc.find(id); it != desc.end()) return it->second;
            if (const Json* tj = find_task(snap, id)) return tj->value("description", "");
            if (added.contains(id)) return added[id].value("description", "");
            return "";
        };
        auto emit = [&](Json op) {
            op.erase("for_each_event");
            auto name = op.value("op", "");
            if (name == "add_task" && op.contains("copy_from")) {
                auto src = op["copy_from"].get<std::string>();
                const Json* s = find_task(snap, src);
                if (!s && added.contains(src)) s = &added[src];
                if (!s) throw Error(ErrorCode::InvalidDelta, "copy_from names unknown task '" + src + "'");
                Json task{{"name", s->value("name", src)},
                          {"description", s->value("description", "")},
                          {"tips", s->value("tips", Json::array())},
                          {"device", s->value("device", "")}};
                for (const auto& [k, v] : op["task"].items()) task[k] = v;
                op["task"] = task;
                op.erase("copy_from");
            }
            if (name == "update_task" && op.contains("description_append")) {
                auto id = op.value("id", "");
                auto cur = current_desc(id);
                auto text = op["description_append"].get<std::string>();
                if (!op.contains("patch")) op["patch"] = Json::object();
                op["patch"]["description"] = cur.empty() ? text : cur + "\n" + text;
                op.erase("description_append");
            }
            auto parsed = edit_op_from_json(op);
            if (auto* a = std::get_if<op::AddTask>(&parsed)) added[a->spec.id] = to_json(a->spec);
            if (auto* u = std::get_if<op::UpdateTask>(&parsed); u && u->patch.description)
                desc[u->id] = *u->patch.description;
            out.delta.ops.push_back(std::move(parsed));
        };
        for (const auto& op : t.output.ops) {
            if (op.contains("for_each_event")) {
                const auto& f = op["for_each_event"];
                if (f.is_boolean() && !f.get<bool>()) {
                    emit(render_json(op, snap, first, in.request));
                    continue;
                }
                EventPattern filter;
                if (f.is_object()) filter = parse_pattern(f);
                for (auto i : bound)
                    if (event_matches(filter, in.events[i])) emit(render_json(op, snap, &in.events[i], in.request));
            } else {
                emit(render_json(op, snap, first, in.request));
            }
        }
        if (out.observation.empty()) out.observation = describe_events(in.events);
        if (out.thought.empty()) out.thought = "matched trigger '" + t.name + "'";
        if (out.result.empty())
            out.result = std::to_string(out.delta.ops.size()) + " edit op(s), next state " +
                         std::string(to_string(out.next_state));
        return out;
    }

    if (script_.strict)
        throw Error(ErrorCode::ScriptMiss, "no trigger for " + std::string(to_string(in.mode)) + " input with " +
                                               describe_events(in.events));
    fired_.emplace_back();
    PlannerOutput out;
    out.observation = describe_events(in.events);
    if (in.mode == PlannerMode::Create) {
        out.next_state = in.request.empty() ? PlannerState::Finish : PlannerState::Continue;
        out.thought = "no scripted decomposition";
    } else {
        bool all_done = snap && snap->contains("tasks") && !(*snap)["tasks"].empty();
        if (all_done)
            for (const auto& t : (*snap)["tasks"])
                if (t.value("status", "") != "COMPLETED") all_done = false;
        out.next_state = all_done ? PlannerState::Finish : PlannerState::Continue;
        out.thought = all_done ? "every task completed" : "work remains; no edit needed";
    }
    out.result = "no changes, next state " + std::string(to_string(out.next_state));
    out.delta.provenance = "script:fallback";
    return out;
}

}  // namespace constellation
