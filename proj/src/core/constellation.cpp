#include "constellation/core/constellation.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>

namespace constellation {

namespace {

std::string quote(const std::string& s) {
    return "'" + s + "'";
}

// Tarjan SCC over tasks with well-formed edges. Returns sorted member lists of
// every strongly connected component that contains a cycle.
std::vector<std::vector<TaskId>> cyclic_components(const TaskConstellation& c) {
    std::map<TaskId, std::vector<TaskId>> adj;
    std::set<TaskId> self_loops;
    for (const auto& [id, e] : c.edges()) {
        if (!c.has_task(e.from_task) || !c.has_task(e.to_task)) continue;
        if (e.from_task == e.to_task) self_loops.insert(e.from_task);
        adj[e.from_task].push_back(e.to_task);
    }
    for (auto& [k, v] : adj) std::sort(v.begin(), v.end());

    std::map<TaskId, int> index, low;
    std::set<TaskId> on_stack;
    std::vector<TaskId> stack;
    std::vector<std::vector<TaskId>> out;
    int counter = 0;

    std::function<void(const TaskId&)> strong = [&](const TaskId& v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack.insert(v);
        for (const auto& w : adj[v]) {
            if (!index.count(w)) {
                strong(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack.count(w)) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::vector<TaskId> comp;
            TaskId w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack.erase(w);
                comp.push_back(w);
            } while (w != v);
            if (comp.size() > 1 || self_loops.count(v)) {
                std::sort(comp.begin(), comp.end());
                out.push_back(std::move(comp));
            }
        }
    };
    for (const auto& [id, t] : c.tasks())
        if (!index.count(id)) strong(id);
    std::sort(out.begin(), out.end());
    return out;
}

void check_patch_fields(const TaskId& id, const TaskPatch& patch) {
    if (patch.status) throw Error(ErrorCode::IllegalField, "patch may not set status of " + quote(id));
    if (patch.result) throw Error(ErrorCode::IllegalField, "patch may not set result of " + quote(id));
}

}  // namespace

const TaskStar& TaskConstellation::task(const TaskId& id) const {
    auto it = tasks_.find(id);
    if (it == tasks_.end()) throw Error(ErrorCode::NotFound, "task " + quote(id));
    return it->second;
}

const TaskStarLine& TaskConstellation::edge(const EdgeId& id) const {
    auto it = edges_.find(id);
    if (it == edges_.end()) throw Error(ErrorCode::NotFound, "dependency " + quote(id));
    return it->second;
}

std::vector<EdgeId> TaskConstellation::incoming(const TaskId& id) const {
    std::vector<EdgeId> out;
    for (const auto& [eid, e] : edges_)
        if (e.to_task == id) out.push_back(eid);
    return out;
}

std::vector<EdgeId> TaskConstellation::outgoing(const TaskId& id) const {
    std::vector<EdgeId> out;
    for (const auto& [eid, e] : edges_)
        if (e.from_task == id) out.push_back(eid);
    return out;
}

std::optional<EdgeId> TaskConstellation::find_edge(const TaskId& from, const TaskId& to) const {
    for (const auto& [eid, e] : edges_)
        if (e.from_task == from && e.to_task == to) return eid;
    return std::nullopt;
}

void TaskConstellation::stage_add_task(const TaskSpec& spec) {
    if (spec.id.empty()) throw Error(ErrorCode::IllegalField, "task id must be non-empty");
    if (tasks_.count(spec.id)) throw Error(ErrorCode::DuplicateId, "task " + quote(spec.id));
    tasks_.emplace(spec.id, TaskStar::from_spec(spec));
}

void TaskConstellation::stage_remove_task(const TaskId& id) {
    const auto& t = task(id);
    if (t.status != TaskStatus::Pending)
        throw Error(ErrorCode::ImmutableTask, quote(id) + " is " + std::string(to_string(t.status)));
    for (const auto& eid : outgoing(id)) {
        const auto& down = edges_.at(eid).to_task;
        auto it = tasks_.find(down);
        if (it != tasks_.end() && it->second.status != TaskStatus::Pending)
            throw Error(ErrorCode::ImmutableTask,
                        "removing " + quote(id) + " would change inputs of " + quote(down));
    }
    for (auto it = edges_.begin(); it != edges_.end();) {
        if (it->second.from_task == id || it->second.to_task == id)
            it = edges_.erase(it);
        else
            ++it;
    }
    tasks_.erase(id);
}

void TaskConstellation::stage_update_task(const TaskId& id, const TaskPatch& patch) {
    const auto& cur = task(id);
    check_patch_fields(id, patch);
    if (cur.status != TaskStatus::Pending)
        throw Error(ErrorCode::ImmutableTask, quote(id) + " is " + std::string(to_string(cur.status)));
    auto& t = tasks_.at(id);
    if (patch.name) t.name = *patch.name;
    if (patch.description) t.description = *patch.description;
    if (patch.device) t.device = *patch.device;
    if (patch.tips) t.tips = *patch.tips;
}

void TaskConstellation::stage_add_dependency(const TaskStarLine& spec) {
    if (spec.id.empty()) throw Error(ErrorCode::IllegalField, "dependency id must be non-empty");
    if (edges_.count(spec.id)) throw Error(ErrorCode::DuplicateId, "dependency " + quote(spec.id));
    task(spec.from_task);
    const auto& to = task(spec.to_task);
    if (to.status != TaskStatus::Pending)
        throw Error(ErrorCode::ImmutableTask,
                    "inputs of " + quote(spec.to_task) + " are frozen (" +
                        std::string(to_string(to.status)) + ")");
    if (spec.from_task == spec.to_task)
        throw Error(ErrorCode::CycleIntroduced, "self-loop on " + quote(spec.from_task),
                    {Violation{ErrorCode::CycleIntroduced, "", {spec.from_task}}});
    if (auto dup = find_edge(spec.from_task, spec.to_task))
        throw Error(ErrorCode::DuplicateEdge,
                    spec.from_task + "->" + spec.to_task + " already exists as " + quote(*dup));
    edges_.emplace(spec.id, spec);
}

void TaskConstellation::stage_remove_dependency(const EdgeId& id) {
    const auto& e = edge(id);
    auto it = tasks_.find(e.to_task);
    if (it != tasks_.end() && it->second.status != TaskStatus::Pending)
        throw Error(ErrorCode::ImmutableTask, "inputs of " + quote(e.to_task) + " are frozen");
    edges_.erase(id);
}

void TaskConstellation::stage_update_dependency(const EdgeId& id, const DependencyPatch& patch) {
    const auto& e = edge(id);
    auto it = tasks_.find(e.to_task);
    if (it != tasks_.end() && it->second.status != TaskStatus::Pending)
        throw Error(ErrorCode::ImmutableTask, "inputs of " + quote(e.to_task) + " are frozen");
    auto& m = edges_.at(id);
    if (patch.dep_type) m.dep_type = *patch.dep_type;
    if (patch.description) m.description = *patch.description;
}

void TaskConstellation::require_acyclic() const {
    auto cycles = cyclic_components(*this);
    if (cycles.empty()) return;
    std::vector<Violation> vs;
    for (auto& comp : cycles) vs.push_back(Violation{ErrorCode::CycleIntroduced, "", comp});
    throw Error(ErrorCode::CycleIntroduced, "edit would create a cycle", std::move(vs));
}

void TaskConstellation::add_task(const TaskSpec& spec) {
    auto next = *this;
    next.stage_add_task(spec);
    next.version_++;
    *this = std::move(next);
}

void TaskConstellation::remove_task(const TaskId& id) {
    auto next = *this;
    next.stage_remove_task(id);
    next.version_++;
    *this = std::move(next);
}

void TaskConstellation::update_task(const TaskId& id, const TaskPatch& patch) {
    auto next = *this;
    next.stage_update_task(id, patch);
    next.version_++;
    *this = std::move(next);
}

void TaskConstellation::add_dependency(const TaskStarLine& spec) {
    auto next = *this;
    next.stage_add_dependency(spec);
    next.require_acyclic();
    next.version_++;
    *this = std::move(next);
}

void TaskConstellation::remove_dependency(const EdgeId& id) {
    auto next = *this;
    next.stage_remove_dependency(id);
    next.version_++;
    *this = std::move(next);
}

void TaskConstellation::update_dependency(const EdgeId& id, const DependencyPatch& patch) {
    auto next = *this;
    next.stage_update_dependency(id, patch);
    next.version_++;
    *this = std::move(next);
}

void TaskConstellation::transition(const TaskId& id, TaskStatus to, std::optional<Json> result,
                                   std::optional<FailureReason> reason) {
    auto it = tasks_.find(id);
    if (it == tasks_.end()) throw Error(ErrorCode::UnknownTask, "task " + quote(id));
    auto& t = it->second;
    if (!is_legal_transition(t.status, to))
        throw Error(ErrorCode::IllegalTransition, quote(id) + ": " + std::string(to_string(t.status)) +
                                                      " -> " + std::string(to_string(to)));
    t.status = to;
    if (is_terminal(to)) {
        t.result = std::move(result);
        if (to == TaskStatus::Failed) t.failure_reason = reason.value_or(FailureReason::ExecutionError);
    }
}

bool TaskConstellation::fold(const TaskOutcome& outcome) {
    auto it = tasks_.find(outcome.task_id);
    if (it == tasks_.end()) throw Error(ErrorCode::UnknownTask, "task " + quote(outcome.task_id));
    if (it->second.status == outcome.status && is_terminal(outcome.status)) return false;
    transition(outcome.task_id, outcome.status, outcome.result, outcome.failure_reason);
    return true;
}

void TaskConstellation::insert_task_unchecked(TaskStar t) {
    auto id = t.id;
    tasks_[id] = std::move(t);
}

void TaskConstellation::insert_edge_unchecked(TaskStarLine e) {
    auto id = e.id;
    edges_[id] = std::move(e);
}

void TaskConstellation::erase_task_unchecked(const TaskId& id) {
    tasks_.erase(id);
}

TaskStar& TaskConstellation::task_unchecked(const TaskId& id) {
    auto it = tasks_.find(id);
    if (it == tasks_.end()) throw Error(ErrorCode::NotFound, "task " + quote(id));
    return it->second;
}

std::vector<Violation> validate(const TaskConstellation& c) {
    std::vector<Violation> out;
    for (const auto& [key, t] : c.tasks()) {
        if (key != t.id) out.push_back({ErrorCode::DuplicateId, "task key/id mismatch", {key, t.id}});
    }
    for (const auto& [eid, e] : c.edges()) {
        std::vector<std::string> missing;
        if (!c.has_task(e.from_task)) missing.push_back(e.from_task);
        if (!c.has_task(e.to_task)) missing.push_back(e.to_task);
        if (!missing.empty()) {
            std::string msg = "unknown endpoint";
            for (const auto& m : missing) msg += " " + quote(m);
            out.push_back({ErrorCode::DanglingEdge, msg, {eid}});
        }
    }
    std::map<std::pair<TaskId, TaskId>, std::vector<EdgeId>> pairs;
    for (const auto& [eid, e] : c.edges()) pairs[{e.from_task, e.to_task}].push_back(eid);
    for (const auto& [pr, ids] : pairs) {
        if (ids.size() > 1)
            out.push_back({ErrorCode::DuplicateEdge, pr.first + "->" + pr.second, ids});
    }
    for (auto& comp : cyclic_components(c)) out.push_back({ErrorCode::CycleIntroduced, "", comp});
    for (const auto& [id, t] : c.tasks()) {
        if (t.result && !is_terminal(t.status))
            out.push_back({ErrorCode::IncoherentStatus, "result on non-terminal task", {id}});
        if (t.failure_reason && t.status != TaskStatus::Failed)
            out.push_back({ErrorCode::IncoherentStatus, "failure_reason on non-failed task", {id}});
    }
    return out;
}

std::optional<std::vector<TaskId>> topological_order(const TaskConstellation& c) {
    std::map<TaskId, int> indeg;
    std::map<TaskId, std::vector<TaskId>> adj;
    for (const auto& [id, t] : c.tasks()) indeg[id] = 0;
    for (const auto& [eid, e] : c.edges()) {
        if (!c.has_task(e.from_task) || !c.has_task(e.to_task)) continue;
        adj[e.from_task].push_back(e.to_task);
        indeg[e.to_task]++;
    }
    std::priority_queue<TaskId, std::vector<TaskId>, std::greater<>> ready;
    for (const auto& [id, d] : indeg)
        if (d == 0) ready.push(id);
    std::vector<TaskId> order;
    while (!ready.empty()) {
        auto v = ready.top();
        ready.pop();
        order.push_back(v);
        for (const auto& w : adj[v])
            if (--indeg[w] == 0) ready.push(w);
    }
    if (order.size() != c.tasks().size()) return std::nullopt;
    return order;
}

TaskConstellation build_constellation(const BuildConfig& config, bool clear,
                                      const TaskConstellation& base) {
    std::vector<Violation> vs;
    TaskConstellation next(base.request());
    next.set_version(base.version());
    if (clear) {
        for (const auto& [id, t] : base.tasks())
            if (t.status != TaskStatus::Pending)
                vs.push_back({ErrorCode::ImmutableTask, "clear would drop a started task", {id}});
    } else {
        next = base;
    }
    for (const auto& spec : config.tasks) {
        if (spec.id.empty()) {
            vs.push_back({ErrorCode::IllegalField, "task id must be non-empty", {}});
        } else if (next.has_task(spec.id)) {
            vs.push_back({ErrorCode::DuplicateId, "task", {spec.id}});
        } else {
            next.insert_task_unchecked(TaskStar::from_spec(spec));
        }
    }
    for (const auto& e : config.dependencies) {
        if (e.id.empty()) {
            vs.push_back({ErrorCode::IllegalField, "dependency id must be non-empty", {}});
            continue;
        }
        if (next.has_edge(e.id)) {
            vs.push_back({ErrorCode::DuplicateId, "dependency", {e.id}});
            continue;
        }
        if (next.has_task(e.to_task) && next.task(e.to_task).status != TaskStatus::Pending)
            vs.push_back({ErrorCode::ImmutableTask, "inputs are frozen", {e.to_task}});
        next.insert_edge_unchecked(e);
    }
    for (auto& v : validate(next)) vs.push_back(std::move(v));
    if (!vs.empty()) throw Error(ErrorCode::ValidationFailed, "build_constellation rejected", std::move(vs));
    next.set_version(base.version() + 1);
    return next;
}

}  // namespace constellation
