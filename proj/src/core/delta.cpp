#include "constellation/core/delta.hpp"

#include <type_traits>

namespace constellation {

std::string_view op_name(const EditOp& op) {
    return std::visit(
        [](const auto& o) -> std::string_view {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, op::AddTask>) return "add_task";
            else if constexpr (std::is_same_v<T, op::RemoveTask>) return "remove_task";
            else if constexpr (std::is_same_v<T, op::UpdateTask>) return "update_task";
            else if constexpr (std::is_same_v<T, op::AddDependency>) return "add_dependency";
            else if constexpr (std::is_same_v<T, op::RemoveDependency>) return "remove_dependency";
            else if constexpr (std::is_same_v<T, op::UpdateDependency>) return "update_dependency";
            else return "build_constellation";
        },
        op);
}

DeltaSummary& DeltaSummary::operator+=(const DeltaSummary& o) {
    added_tasks += o.added_tasks;
    removed_tasks += o.removed_tasks;
    modified_tasks += o.modified_tasks;
    added_dependencies += o.added_dependencies;
    removed_dependencies += o.removed_dependencies;
    modified_dependencies += o.modified_dependencies;
    return *this;
}

DeltaSummary diff(const TaskConstellation& pre, const TaskConstellation& post) {
    DeltaSummary s;
    for (const auto& [id, t] : post.tasks()) {
        auto it = pre.tasks().find(id);
        if (it == pre.tasks().end())
            s.added_tasks++;
        else if (it->second.spec() != t.spec())
            s.modified_tasks++;
    }
    for (const auto& [id, t] : pre.tasks())
        if (!post.has_task(id)) s.removed_tasks++;
    for (const auto& [id, e] : post.edges()) {
        auto it = pre.edges().find(id);
        if (it == pre.edges().end())
            s.added_dependencies++;
        else if (it->second != e)
            s.modified_dependencies++;
    }
    for (const auto& [id, e] : pre.edges())
        if (!post.has_edge(id)) s.removed_dependencies++;
    return s;
}

ApplyResult apply_delta(const TaskConstellation& c, const EditDelta& delta) {
    TaskConstellation next = c;
    for (std::size_t i = 0; i < delta.ops.size(); ++i) {
        const auto& eop = delta.ops[i];
        try {
            std::visit(
                [&](const auto& o) {
                    using T = std::decay_t<decltype(o)>;
                    if constexpr (std::is_same_v<T, op::AddTask>) next.stage_add_task(o.spec);
                    else if constexpr (std::is_same_v<T, op::RemoveTask>) next.stage_remove_task(o.id);
                    else if constexpr (std::is_same_v<T, op::UpdateTask>) next.stage_update_task(o.id, o.patch);
                    else if constexpr (std::is_same_v<T, op::AddDependency>) {
                        next.stage_add_dependency(o.spec);
                        next.require_acyclic();
                    }
                    else if constexpr (std::is_same_v<T, op::RemoveDependency>) next.stage_remove_dependency(o.id);
                    else if constexpr (std::is_same_v<T, op::UpdateDependency>)
                        next.stage_update_dependency(o.id, o.patch);
                    else {
                        auto v = next.version();
                        next = build_constellation(o.config, o.clear, next);
                        next.set_version(v);
                    }
                },
                eop);
        } catch (const Error& e) {
            throw Error(e.code(), "op " + std::to_string(i) + " (" + std::string(op_name(eop)) + "): " + e.what(),
                        e.violations());
        }
    }
    auto vs = validate(next);
    if (!vs.empty()) throw Error(ErrorCode::ValidationFailed, "delta leaves an invalid graph", std::move(vs));
    next.set_version(c.version() + 1);
    return ApplyResult{next, diff(c, next)};
}

bool respects_locality(const TaskConstellation& pre, const TaskConstellation& post) {
    for (const auto& [id, t] : pre.tasks()) {
        if (t.status == TaskStatus::Pending) continue;
        if (!post.has_task(id) || post.task(id) != t) return false;
        std::vector<TaskStarLine> a, b;
        for (const auto& e : pre.incoming(id)) a.push_back(pre.edge(e));
        for (const auto& e : post.incoming(id)) b.push_back(post.edge(e));
        if (a != b) return false;
    }
    return true;
}

}  // namespace constellation
