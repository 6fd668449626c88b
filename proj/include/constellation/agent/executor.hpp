#pragma once

#include <memory>
#include <string>
#include <vector>

#include "constellation/aip/message.hpp"

namespace constellation::agent {

struct ExecResult {
    std::string status = "OK";  // OK | ERROR
    Json value = Json::object();
    std::optional<std::string> error;
    double duration = 0.0;  // virtual seconds the action occupies the client
};

// Runs one command on the client side.
class Executor {
  public:
    virtual ~Executor() = default;
    // Throws NoScriptEntry or Timeout; the client turns those into ERROR slots.
    virtual ExecResult execute(const aip::Action& a) = 0;
};

struct ScriptEntry {
    std::string pattern;  // glob over the command line
    int exit_code = 0;
    std::string stdout_text;
    std::string stderr_text;
    double duration = 0.0;
};

// Table-driven executor. EXEC_CLI looks up the command line; SYS_INFO returns
// the telemetry snapshot; NOTEPAD_WRITE echoes the text after 2 s.
class ScriptedExecutor final : public Executor {
  public:
    ScriptedExecutor(std::vector<ScriptEntry> entries, Json telemetry, bool strict = true)
        : entries_(std::move(entries)), telemetry_(std::move(telemetry)), strict_(strict) {}

    // {"strict": bool, "entries": [{"pattern", "status", "stdout", "stderr", "duration"}]}
    static ScriptedExecutor from_json(const Json& table, Json telemetry);

    ExecResult execute(const aip::Action& a) override;

  private:
    std::vector<ScriptEntry> entries_;
    Json telemetry_;
    bool strict_;
};

inline constexpr double kNotepadWriteSeconds = 2.0;

// Table with a "shell" object {"workdir", "allowed_roots", "timeout"} gives
// the real shell (ParseError unless built with CONSTELLATION_REAL_SHELL);
// anything else is a scripted table.
std::shared_ptr<Executor> make_executor(const Json& table, Json telemetry);

#ifdef CONSTELLATION_REAL_SHELL
// Runs EXEC_CLI through /bin/sh inside `workdir`, which must sit under one of
// the allowed roots. Wall-clock only; reports duration 0.
class ShellExecutor final : public Executor {
  public:
    ShellExecutor(std::string workdir, std::vector<std::string> allowed_roots, double timeout_s, Json telemetry);
    ExecResult execute(const aip::Action& a) override;

  private:
    std::string workdir_;
    double timeout_;
    Json telemetry_;
};
#endif

}  // namespace constellation::agent
