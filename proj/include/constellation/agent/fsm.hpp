#pragma once

#include <optional>
#include <string>
#include <vector>

#include "constellation/aip/message.hpp"

namespace constellation::agent {

enum class AgentState { Continue, Finish, Fail };

std::string_view to_string(AgentState s);
std::optional<AgentState> parse_agent_state(std::string_view s);
bool is_terminal(AgentState s);

struct StepResult {
    AgentState next;
    bool round_end;
};

// Throws IllegalTransition when `state` is already terminal.
StepResult fsm_step(AgentState state, AgentState proposed);

enum class StrategyKind { DataCollection, LlmInteraction, ActionExecution, MemoryUpdate };

std::string_view to_string(StrategyKind k);
std::optional<StrategyKind> parse_strategy(std::string_view s);

inline const std::vector<StrategyKind> kLinuxPipeline{StrategyKind::LlmInteraction, StrategyKind::ActionExecution,
                                                      StrategyKind::MemoryUpdate};

struct MemoryEntry {
    int step = 0;
    std::vector<aip::Action> commands;
    std::vector<aip::ActionResult> results;
    Json decision;
};

// Append-only within a task.
class AgentMemory {
  public:
    void append(MemoryEntry e) { entries_.push_back(std::move(e)); }
    void clear() { entries_.clear(); }
    std::size_t size() const { return entries_.size(); }
    const std::vector<MemoryEntry>& entries() const { return entries_; }
    Json to_json() const;

  private:
    std::vector<MemoryEntry> entries_;
};

}  // namespace constellation::agent
