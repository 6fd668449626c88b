#pragma once

#include <string>
#include <variant>
#include <vector>

#include "constellation/core/constellation.hpp"

namespace constellation {

namespace op {
struct AddTask {
    TaskSpec spec;
    bool operator==(const AddTask&) const = default;
};
struct RemoveTask {
    TaskId id;
    bool operator==(const RemoveTask&) const = default;
};
struct UpdateTask {
    TaskId id;
    TaskPatch patch;
    bool operator==(const UpdateTask&) const = default;
};
struct AddDependency {
    TaskStarLine spec;
    bool operator==(const AddDependency&) const = default;
};
struct RemoveDependency {
    EdgeId id;
    bool operator==(const RemoveDependency&) const = default;
};
struct UpdateDependency {
    EdgeId id;
    DependencyPatch patch;
    bool operator==(const UpdateDependency&) const = default;
};
struct BuildConstellation {
    BuildConfig config;
    bool clear = false;
    bool operator==(const BuildConstellation&) const = default;
};
}  // namespace op

using EditOp = std::variant<op::AddTask, op::RemoveTask, op::UpdateTask, op::AddDependency,
                            op::RemoveDependency, op::UpdateDependency, op::BuildConstellation>;

std::string_view op_name(const EditOp& op);

struct EditDelta {
    std::vector<EditOp> ops;
    std::string provenance;  // planner trace reference

    bool empty() const noexcept { return ops.empty(); }
    bool operator==(const EditDelta&) const = default;
};

// Change counts in the six edit categories.
struct DeltaSummary {
    int added_tasks = 0;
    int removed_tasks = 0;
    int modified_tasks = 0;
    int added_dependencies = 0;
    int removed_dependencies = 0;
    int modified_dependencies = 0;

    int total() const noexcept {
        return added_tasks + removed_tasks + modified_tasks + added_dependencies +
               removed_dependencies + modified_dependencies;
    }
    DeltaSummary& operator+=(const DeltaSummary& o);
    bool operator==(const DeltaSummary&) const = default;
};

// Structural diff of task specs and edges. Status changes are not counted.
DeltaSummary diff(const TaskConstellation& pre, const TaskConstellation& post);

struct ApplyResult {
    TaskConstellation constellation;
    DeltaSummary summary;  // payload of the CONSTELLATION_MODIFIED notification
};

// Applies all ops in order, revalidates, bumps version once. Throws on the first
// failing op; `c` is never modified.
ApplyResult apply_delta(const TaskConstellation& c, const EditDelta& delta);

// Edit locality: every non-PENDING task of `pre` survives unchanged in `post`,
// incoming edges included.
bool respects_locality(const TaskConstellation& pre, const TaskConstellation& post);

}  // namespace constellation
