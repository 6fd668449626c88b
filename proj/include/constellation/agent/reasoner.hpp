#pragma once

#include <optional>
#include <string>
#include <vector>

#include "constellation/agent/fsm.hpp"

namespace constellation::agent {

struct ReasonerInput {
    Json task;  // the task spec: id, name, description, tips, device
    int step = 1;
    const AgentMemory* memory = nullptr;
};

struct Decision {
    std::vector<aip::Action> commands;
    AgentState next_state = AgentState::Finish;
    std::optional<AgentState> on_error;  // replaces next_state if any command errs
    std::string summary;
    std::string reason;
};

Json to_json(const Decision& d);

class Reasoner {
  public:
    virtual ~Reasoner() = default;
    virtual Decision decide(const ReasonerInput& in) = 0;
};

struct ReasonerRule {
    std::string task = "*";  // glob over the task name
    std::optional<int> step;
    std::vector<aip::Action> commands;  // ids are assigned per call
    AgentState next_state = AgentState::Finish;
    std::optional<AgentState> on_error;
    std::string summary;
    std::string reason;
};

struct ReasonerScript {
    bool strict = true;
    std::vector<ReasonerRule> rules;
};

// Throws ParseError.
ReasonerScript load_reasoner_script(const Json& j);

// First rule matching the task name and step wins. ${task.id}, ${task.name}
// and ${task.description} are substituted in argument strings and summaries.
// Without a match: NoScriptEntry when strict, otherwise run the description as
// one EXEC_CLI and finish.
class ScriptedReasoner final : public Reasoner {
  public:
    explicit ScriptedReasoner(ReasonerScript s) : script_(std::move(s)) {}
    Decision decide(const ReasonerInput& in) override;

  private:
    ReasonerScript script_;
};

}  // namespace constellation::agent
