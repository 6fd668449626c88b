#pragma once

#include <string>

#include "constellation/core/constellation.hpp"
#include "constellation/core/delta.hpp"

namespace constellation {

Json to_json(const TaskStar& t, const std::vector<EdgeId>& dependencies);
Json to_json(const TaskStarLine& e);
Json to_json(const TaskSpec& s);
Json to_json(const TaskPatch& p);
Json to_json(const DependencyPatch& p);
Json to_json(const EditOp& op);
Json to_json(const EditDelta& d);
Json to_json(const DeltaSummary& s);

// Canonical document: request, version, tasks (by id), dependencies (by id).
Json serialize(const TaskConstellation& c);
std::string serialize_text(const TaskConstellation& c);

// ParseError on malformed input, ValidationFailed if the graph is invalid.
TaskConstellation deserialize(const Json& doc);
TaskConstellation deserialize_text(const std::string& text);
// Parses without running validate(); duplicate ids still fail.
TaskConstellation deserialize_unvalidated(const Json& doc);

TaskSpec task_spec_from_json(const Json& j);
TaskStarLine edge_from_json(const Json& j);
TaskPatch task_patch_from_json(const Json& j);
DependencyPatch dependency_patch_from_json(const Json& j);
DependencyType dependency_type_from_json(const Json& j);
EditOp edit_op_from_json(const Json& j);
EditDelta edit_delta_from_json(const Json& j);

}  // namespace constellation
