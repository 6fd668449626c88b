#include "constellation/core/readiness.hpp"

namespace constellation {

void ConditionRegistry::add(const std::string& id, Predicate p) {
    preds_[id] = std::move(p);
}

void ConditionRegistry::add_constant(const std::string& id, bool value) {
    add(id, [value](const TaskStar&) { return value; });
}

void ConditionRegistry::add_field_equals(const std::string& id, const std::string& field, Json value) {
    add(id, [field, value = std::move(value)](const TaskStar& up) {
        if (!up.result || !up.result->is_object()) return false;
        auto it = up.result->find(field);
        return it != up.result->end() && *it == value;
    });
}

bool ConditionRegistry::evaluate(const std::string& id, const TaskStar& upstream) const {
    auto it = preds_.find(id);
    if (it == preds_.end()) throw Error(ErrorCode::UnknownCondition, "condition '" + id + "'");
    return it->second(upstream);
}

const ConditionRegistry& empty_registry() {
    static const ConditionRegistry reg;
    return reg;
}

bool edge_satisfied(const TaskStarLine& e, const TaskStar& up, const ConditionRegistry& reg) {
    switch (e.dep_type.kind) {
        case DependencyType::Kind::Unconditional:
            return is_terminal(up.status);
        case DependencyType::Kind::SuccessOnly:
            return up.status == TaskStatus::Completed;
        case DependencyType::Kind::Conditional:
        {
            // Evaluated even for a non-terminal upstream so a missing evaluator
            // always surfaces.
            bool pass = reg.evaluate(e.dep_type.condition_id, up);
            return is_terminal(up.status) && pass;
        }
    }
    return false;
}

bool edge_dead(const TaskStarLine& e, const TaskStar& up, const ConditionRegistry& reg) {
    switch (e.dep_type.kind) {
        case DependencyType::Kind::Unconditional:
            return false;
        case DependencyType::Kind::SuccessOnly:
            return up.status == TaskStatus::Failed;
        case DependencyType::Kind::Conditional:
            return is_terminal(up.status) && !reg.evaluate(e.dep_type.condition_id, up);
    }
    return false;
}

std::vector<TaskId> ready_tasks(const TaskConstellation& c, const ConditionRegistry& reg) {
    std::map<TaskId, bool> ok;
    for (const auto& [id, t] : c.tasks())
        if (t.status == TaskStatus::Pending) ok[id] = true;
    for (const auto& [eid, e] : c.edges()) {
        auto it = ok.find(e.to_task);
        if (it == ok.end()) continue;
        const auto& up = c.task(e.from_task);
        if (!edge_satisfied(e, up, reg)) it->second = false;
    }
    std::vector<TaskId> out;
    for (const auto& [id, r] : ok)
        if (r) out.push_back(id);
    return out;
}

std::set<TaskId> blocked_tasks(const TaskConstellation& c, const ConditionRegistry& reg) {
    std::set<TaskId> doomed;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [eid, e] : c.edges()) {
            const auto& down = c.task(e.to_task);
            if (down.status != TaskStatus::Pending || doomed.count(e.to_task)) continue;
            const auto& up = c.task(e.from_task);
            if (doomed.count(e.from_task) || edge_dead(e, up, reg)) {
                doomed.insert(e.to_task);
                changed = true;
            }
        }
    }
    return doomed;
}

bool is_quiescent(const TaskConstellation& c, const ConditionRegistry& reg) {
    auto doomed = blocked_tasks(c, reg);
    for (const auto& [id, t] : c.tasks()) {
        if (t.status == TaskStatus::Running) return false;
        if (t.status == TaskStatus::Pending && !doomed.count(id)) return false;
    }
    return true;
}

}  // namespace constellation
