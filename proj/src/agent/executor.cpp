#include "constellation/agent/executor.hpp"

#include "constellation/error.hpp"
#include "constellation/util/glob.hpp"

namespace constellation::agent {

namespace {

[[noreturn]] void parse_fail(const std::string& what) {
    throw Error(ErrorCode::ParseError, "executor table: " + what);
}

}  // namespace

ScriptedExecutor ScriptedExecutor::from_json(const Json& table, Json telemetry) {
    if (!table.is_object()) parse_fail("must be an object");
    bool strict = table.value("strict", true);
    std::vector<ScriptEntry> entries;
    if (table.contains("entries")) {
        if (!table["entries"].is_array()) parse_fail("'entries' must be an array");
        for (const auto& e : table["entries"]) {
            if (!e.is_object() || !e.contains("pattern") || !e["pattern"].is_string())
                parse_fail("every entry needs a string 'pattern'");
            ScriptEntry s;
            s.pattern = e["pattern"].get<std::string>();
            s.exit_code = e.value("status", 0);
            s.stdout_text = e.value("stdout", "");
            s.stderr_text = e.value("stderr", "");
            s.duration = e.value("duration", 0.0);
            if (s.duration < 0) parse_fail("negative duration for '" + s.pattern + "'");
            entries.push_back(std::move(s));
        }
    }
    return ScriptedExecutor(std::move(entries), std::move(telemetry), strict);
}

ExecResult ScriptedExecutor::execute(const aip::Action& a) {
    ExecResult r;
    if (a.function == "SYS_INFO") {
        r.value = telemetry_;
        return r;
    }
    if (a.function == "NOTEPAD_WRITE") {
        r.value = Json{{"written", a.arguments.value("text", "")}};
        r.duration = kNotepadWriteSeconds;
        return r;
    }
    if (a.function != "EXEC_CLI") throw Error(ErrorCode::NoScriptEntry, "no tool for function '" + a.function + "'");
    auto line = a.arguments.value("command", "");
    for (const auto& e : entries_) {
        if (!glob_match(e.pattern, line)) continue;
        r.value = Json{{"exit_code", e.exit_code}, {"stdout", e.stdout_text}, {"stderr", e.stderr_text}};
        r.duration = e.duration;
        if (e.exit_code != 0) {
            r.status = "ERROR";
            r.error = "exit code " + std::to_string(e.exit_code);
        }
        return r;
    }
    if (strict_) throw Error(ErrorCode::NoScriptEntry, "no scripted entry for '" + line + "'");
    r.value = Json{{"exit_code", 0}, {"stdout", ""}, {"stderr", ""}};
    return r;
}

std::shared_ptr<Executor> make_executor(const Json& table, Json telemetry) {
    if (!table.is_object() || !table.contains("shell"))
        return std::make_shared<ScriptedExecutor>(ScriptedExecutor::from_json(table, std::move(telemetry)));
#ifdef CONSTELLATION_REAL_SHELL
    const auto& sh = table["shell"];
    if (!sh.is_object() || !sh.contains("workdir")) parse_fail("'shell' needs a 'workdir'");
    return std::make_shared<ShellExecutor>(sh["workdir"].get<std::string>(),
                                           sh.value("allowed_roots", std::vector<std::string>{}),
                                           sh.value("timeout", 60.0), std::move(telemetry));
#else
    parse_fail("'shell' executor needs a build with CONSTELLATION_REAL_SHELL=ON");
#endif
}

}  // namespace constellation::agent
