#pragma once

#include <optional>
#include <string>
#include <vector>

#include "constellation/planner/planner.hpp"

namespace constellation {

struct EventPattern {
    std::optional<EventKind> kind;  // any kind when unset
    std::string task = "*";         // glob on task id
    int min = 1;
    std::optional<int> max;
};

struct StateCondition {
    std::string task;  // glob; at least one task must match
    TaskStatus status = TaskStatus::Pending;
};

// Output template. Strings may contain ${...} placeholders; ops may use the
// script-only keys for_each_event, copy_from and description_append.
struct OutputTemplate {
    std::string observation;
    std::string thought;
    PlannerState next_state = PlannerState::Continue;
    std::string result;
    Json ops = Json::array();
    std::string provenance;
};

struct Trigger {
    std::string name;
    PlannerMode mode = PlannerMode::Edit;
    std::optional<std::string> request;          // glob
    std::optional<std::vector<EventPattern>> events;  // unset: any batch
    std::vector<StateCondition> state;
    OutputTemplate output;
};

struct PlannerScript {
    bool strict = false;
    std::vector<Trigger> triggers;
};

// Empty or whitespace-only text gives an empty non-strict script.
// Throws ParseError on malformed documents, patterns, or op shapes.
PlannerScript load_script(const std::string& text);
PlannerScript load_script_json(const Json& doc);
PlannerScript load_script_file(const std::string& path);

// Indices into `events` bound to each pattern, or nullopt when the batch does
// not match. Patterns are matched greedily in order and must cover the batch.
std::optional<std::vector<std::size_t>> match_events(const std::vector<EventPattern>& patterns,
                                                     const std::vector<OrchestratorEvent>& events);

// Replaces ${...} placeholders. `event` may be null. Unknown placeholders are
// left in place.
std::string render(const std::string& tmpl, const Json* snapshot, const OrchestratorEvent* event,
                   const std::string& request);

class ScriptedPlanner final : public Planner {
  public:
    explicit ScriptedPlanner(PlannerScript script) : script_(std::move(script)) {}

    PlannerOutput create(const PlannerInput& in) override;
    PlannerOutput edit(const PlannerInput& in) override;

    const PlannerScript& script() const { return script_; }
    // Trigger name used for each call, in call order ("" for the fallback).
    const std::vector<std::string>& fired() const { return fired_; }

  private:
    PlannerOutput respond(const PlannerInput& in);

    PlannerScript script_;
    std::vector<std::string> fired_;
};

}  // namespace constellation
