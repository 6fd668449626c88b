#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "constellation/core/constellation.hpp"

namespace constellation {

// Named predicates over an upstream task, used by CONDITIONAL edges.
class ConditionRegistry {
  public:
    using Predicate = std::function<bool(const TaskStar& upstream)>;

    void add(const std::string& id, Predicate p);
    void add_constant(const std::string& id, bool value);
    // True iff upstream.result[field] == value.
    void add_field_equals(const std::string& id, const std::string& field, Json value);

    bool contains(const std::string& id) const { return preds_.count(id) != 0; }
    // Throws UnknownCondition.
    bool evaluate(const std::string& id, const TaskStar& upstream) const;

  private:
    std::map<std::string, Predicate> preds_;
};

const ConditionRegistry& empty_registry();

bool edge_satisfied(const TaskStarLine& e, const TaskStar& upstream, const ConditionRegistry& reg);
// An edge that can never become satisfied given the upstream's terminal status.
bool edge_dead(const TaskStarLine& e, const TaskStar& upstream, const ConditionRegistry& reg);

// PENDING tasks whose incoming edges are all satisfied, sorted by id.
std::vector<TaskId> ready_tasks(const TaskConstellation& c,
                                const ConditionRegistry& reg = empty_registry());

// PENDING tasks that can never become ready.
std::set<TaskId> blocked_tasks(const TaskConstellation& c,
                               const ConditionRegistry& reg = empty_registry());

bool is_quiescent(const TaskConstellation& c, const ConditionRegistry& reg = empty_registry());

}  // namespace constellation
