#include "constellation/agent/fsm.hpp"

#include "constellation/error.hpp"

namespace constellation::agent {

std::string_view to_string(AgentState s) {
    switch (s) {
        case AgentState::Continue: return "CONTINUE";
        case AgentState::Finish:   return "FINISH";
        case AgentState::Fail:     return "FAIL";
    }
    return "FAIL";
}

std::optional<AgentState> parse_agent_state(std::string_view s) {
    for (auto st : {AgentState::Continue, AgentState::Finish, AgentState::Fail})
        if (to_string(st) == s) return st;
    return std::nullopt;
}

bool is_terminal(AgentState s) {
    return s != AgentState::Continue;
}

StepResult fsm_step(AgentState state, AgentState proposed) {
    if (is_terminal(state))
        throw Error(ErrorCode::IllegalTransition,
                    std::string(to_string(state)) + " is terminal, cannot move to " + std::string(to_string(proposed)));
    return {proposed, is_terminal(proposed)};
}

std::string_view to_string(StrategyKind k) {
    switch (k) {
        case StrategyKind::DataCollection:  return "DATA_COLLECTION";
        case StrategyKind::LlmInteraction:  return "LLM_INTERACTION";
        case StrategyKind::ActionExecution: return "ACTION_EXECUTION";
        case StrategyKind::MemoryUpdate:    return "MEMORY_UPDATE";
    }
    return "MEMORY_UPDATE";
}

std::optional<StrategyKind> parse_strategy(std::string_view s) {
    for (auto k : {StrategyKind::DataCollection, StrategyKind::LlmInteraction, StrategyKind::ActionExecution,
                   StrategyKind::MemoryUpdate})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

Json AgentMemory::to_json() const {
    Json out = Json::array();
    for (const auto& e : entries_) {
        Json cmds = Json::array(), res = Json::array();
        for (const auto& c : e.commands) cmds.push_back({{"id", c.id}, {"function", c.function}, {"arguments", c.arguments}});
        for (const auto& r : e.results) {
            Json rj{{"id", r.id}, {"status", r.status}, {"value", r.value}};
            if (r.error) rj["error"] = *r.error;
            res.push_back(rj);
        }
        out.push_back({{"step", e.step}, {"commands", cmds}, {"results", res}, {"decision", e.decision}});
    }
    return out;
}

}  // namespace constellation::agent
