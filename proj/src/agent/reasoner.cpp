#include "constellation/agent/reasoner.hpp"

#include "constellation/error.hpp"
#include "constellation/util/glob.hpp"

namespace constellation::agent {

namespace {

[[noreturn]] void parse_fail(const std::string& what) {
    throw Error(ErrorCode::ParseError, "reasoner script: " + what);
}

AgentState state_field(const Json& j, const char* key) {
    if (!j[key].is_string()) parse_fail(std::string("'") + key + "' must be a string");
    auto s = parse_agent_state(j[key].get<std::string>());
    if (!s) parse_fail(std::string("unknown state in '") + key + "'");
    return *s;
}

std::string fill(const std::string& text, const Json& task) {
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        auto open = text.find("${", i);
        if (open == std::string::npos) break;
        auto close = text.find('}', open);
        if (close == std::string::npos) break;
        out += text.substr(i, open - i);
        auto key = text.substr(open + 2, close - open - 2);
        if (key.rfind("task.", 0) == 0 && task.is_object() && task.contains(key.substr(5)) &&
            task[key.substr(5)].is_string())
            out += task[key.substr(5)].get<std::string>();
        else
            out += text.substr(open, close - open + 1);
        i = close + 1;
    }
    return out + text.substr(std::min(i, text.size()));
}

Json fill_json(const Json& j, const Json& task) {
    if (j.is_string()) return fill(j.get<std::string>(), task);
    if (j.is_array() || j.is_object()) {
        Json out = j;
        for (auto it = out.begin(); it != out.end(); ++it) *it = fill_json(*it, task);
        return out;
    }
    return j;
}

}  // namespace

Json to_json(const Decision& d) {
    Json cmds = Json::array();
    for (const auto& c : d.commands) cmds.push_back({{"id", c.id}, {"function", c.function}, {"arguments", c.arguments}});
    Json j{{"commands", cmds}, {"next_state", to_string(d.next_state)}, {"summary", d.summary}, {"reason", d.reason}};
    if (d.on_error) j["on_error"] = to_string(*d.on_error);
    return j;
}

ReasonerScript load_reasoner_script(const Json& j) {
    if (!j.is_object()) parse_fail("must be an object");
    ReasonerScript s;
    if (j.contains("strict")) {
        if (!j["strict"].is_boolean()) parse_fail("'strict' must be a boolean");
        s.strict = j["strict"].get<bool>();
    }
    if (!j.contains("rules")) return s;
    if (!j["rules"].is_array()) parse_fail("'rules' must be an array");
    for (const auto& r : j["rules"]) {
        if (!r.is_object()) parse_fail("every rule must be an object");
        ReasonerRule rule;
        rule.task = r.value("task", "*");
        if (r.contains("step")) {
            if (!r["step"].is_number_integer() || r["step"].get<int>() < 1) parse_fail("'step' must be a positive integer");
            rule.step = r["step"].get<int>();
        }
        if (r.contains("commands")) {
            if (!r["commands"].is_array()) parse_fail("'commands' must be an array");
            for (const auto& c : r["commands"]) {
                if (!c.is_object() || !c.contains("function") || !c["function"].is_string())
                    parse_fail("every command needs a string 'function'");
                aip::Action a;
                a.function = c["function"].get<std::string>();
                a.arguments = c.value("arguments", Json::object());
                if (!a.arguments.is_object()) parse_fail("'arguments' must be an object");
                rule.commands.push_back(std::move(a));
            }
        }
        if (r.contains("next_state")) rule.next_state = state_field(r, "next_state");
        if (r.contains("on_error")) rule.on_error = state_field(r, "on_error");
        rule.summary = r.value("summary", "");
        rule.reason = r.value("reason", "");
        s.rules.push_back(std::move(rule));
    }
    return s;
}

Decision ScriptedReasoner::decide(const ReasonerInput& in) {
    const auto name = in.task.value("name", "");
    for (const auto& r : script_.rules) {
        if (!glob_match(r.task, name)) continue;
        if (r.step && *r.step != in.step) continue;
        Decision d;
        int n = 0;
        for (const auto& c : r.commands) {
            aip::Action a = c;
            a.id = "a" + std::to_string(++n);
            a.arguments = fill_json(c.arguments, in.task);
            d.commands.push_back(std::move(a));
        }
        d.next_state = r.next_state;
        d.on_error = r.on_error;
        d.summary = fill(r.summary, in.task);
        d.reason = fill(r.reason, in.task);
        return d;
    }
    if (script_.strict)
        throw Error(ErrorCode::NoScriptEntry,
                    "no reasoner rule for task '" + name + "' at step " + std::to_string(in.step));
    Decision d;
    auto desc = in.task.value("description", "");
    d.commands.push_back(aip::Action{"a1", "EXEC_CLI", Json{{"command", desc}}});
    d.next_state = AgentState::Finish;
    d.on_error = AgentState::Fail;
    d.summary = "ran: " + desc;
    d.reason = "command failed";
    return d;
}

}  // namespace constellation::agent
