#include "constellation/planner/planner.hpp"

#include "constellation/core/serialize.hpp"
#include "constellation/error.hpp"

namespace constellation {

std::string_view to_string(PlannerState s) {
    switch (s) {
        case PlannerState::Start:    return "START";
        case PlannerState::Continue: return "CONTINUE";
        case PlannerState::Finish:   return "FINISH";
        case PlannerState::Fail:     return "FAIL";
    }
    return "START";
}

std::string_view to_string(PlannerMode m) {
    return m == PlannerMode::Create ? "CREATE" : "EDIT";
}

std::optional<PlannerState> parse_planner_state(std::string_view s) {
    if (s == "START") return PlannerState::Start;
    if (s == "CONTINUE") return PlannerState::Continue;
    if (s == "FINISH") return PlannerState::Finish;
    if (s == "FAIL") return PlannerState::Fail;
    return std::nullopt;
}

std::optional<PlannerMode> parse_planner_mode(std::string_view s) {
    if (s == "CREATE") return PlannerMode::Create;
    if (s == "EDIT") return PlannerMode::Edit;
    return std::nullopt;
}

PlannerState fsm_advance(PlannerState current, PlannerState next) {
    if (is_terminal(current) || next == PlannerState::Start)
        throw Error(ErrorCode::IllegalTransition,
                    "planner " + std::string(to_string(current)) + " -> " + std::string(to_string(next)));
    return next;
}

Json to_json(const PlannerInput& in) {
    Json ev = Json::array();
    for (const auto& e : in.events) ev.push_back(to_json(e));
    Json j{{"mode", to_string(in.mode)}, {"request", in.request}, {"profiles", in.profiles}, {"events", ev}};
    if (in.snapshot) j["snapshot"] = *in.snapshot;
    if (in.rejection) j["rejection"] = *in.rejection;
    if (!in.demonstrations.is_null()) j["demonstrations"] = in.demonstrations;
    return j;
}

Json to_json(const PlannerOutput& out) {
    return Json{{"observation", out.observation},
                {"thought", out.thought},
                {"next_state", to_string(out.next_state)},
                {"result", out.result},
                {"delta", to_json(out.delta)}};
}

PlannerOutput planner_output_from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "planner output must be an object");
    PlannerOutput o;
    o.observation = j.value("observation", "");
    o.thought = j.value("thought", "");
    o.result = j.value("result", "");
    auto st = parse_planner_state(j.value("next_state", ""));
    if (!st) throw Error(ErrorCode::ParseError, "planner output has no valid next_state");
    o.next_state = *st;
    if (j.contains("delta")) o.delta = edit_delta_from_json(j["delta"]);
    return o;
}

PlannerOutput ExternalPlanner::create(const PlannerInput& in) {
    return planner_output_from_json(call_(to_json(in)));
}

PlannerOutput ExternalPlanner::edit(const PlannerInput& in) {
    return planner_output_from_json(call_(to_json(in)));
}

}  // namespace constellation
