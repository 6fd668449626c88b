#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "constellation/core/delta.hpp"
#include "constellation/core/event.hpp"

namespace constellation {

enum class PlannerState { Start, Continue, Finish, Fail };
enum class PlannerMode { Create, Edit };

std::string_view to_string(PlannerState s);
std::string_view to_string(PlannerMode m);
std::optional<PlannerState> parse_planner_state(std::string_view s);
std::optional<PlannerMode> parse_planner_mode(std::string_view s);

constexpr bool is_terminal(PlannerState s) noexcept {
    return s == PlannerState::Finish || s == PlannerState::Fail;
}

// START -> {CONTINUE, FINISH, FAIL}, CONTINUE -> {CONTINUE, FINISH, FAIL}.
// Throws IllegalTransition otherwise.
PlannerState fsm_advance(PlannerState current, PlannerState next);

struct PlannerInput {
    PlannerMode mode = PlannerMode::Edit;
    std::string request;
    Json profiles = Json::array();
    std::optional<Json> snapshot;  // EDIT only
    std::vector<OrchestratorEvent> events;
    // Set when the previous output for this batch was rejected.
    std::optional<std::string> rejection;
    // In-context examples for a model-backed planner. Passed through untouched.
    Json demonstrations;
};

struct PlannerOutput {
    std::string observation;
    std::string thought;
    PlannerState next_state = PlannerState::Continue;
    std::string result;
    EditDelta delta;

    bool operator==(const PlannerOutput&) const = default;
};

class Planner {
  public:
    virtual ~Planner() = default;
    // ScriptMiss when a strict script has no trigger for the input.
    virtual PlannerOutput create(const PlannerInput& in) = 0;
    virtual PlannerOutput edit(const PlannerInput& in) = 0;
};

Json to_json(const PlannerInput& in);
Json to_json(const PlannerOutput& out);
PlannerOutput planner_output_from_json(const Json& j);

// Where a model-backed planner would plug in: the input is serialized to JSON,
// handed to `call`, and the reply is parsed as a PlannerOutput. Nothing in the
// repository ships a model; tests drive this with a lambda.
class ExternalPlanner final : public Planner {
  public:
    using Call = std::function<Json(const Json& request)>;
    explicit ExternalPlanner(Call call) : call_(std::move(call)) {}

    PlannerOutput create(const PlannerInput& in) override;
    PlannerOutput edit(const PlannerInput& in) override;

  private:
    Call call_;
};

}  // namespace constellation
