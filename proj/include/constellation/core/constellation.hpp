#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "constellation/core/types.hpp"
#include "constellation/error.hpp"

namespace constellation {

// Batch input for build_constellation.
struct BuildConfig {
    std::vector<TaskSpec> tasks;
    std::vector<TaskStarLine> dependencies;

    bool operator==(const BuildConfig&) const = default;
};

// Terminal status reported by the runtime for one task.
struct TaskOutcome {
    TaskId task_id;
    TaskStatus status = TaskStatus::Completed;
    std::optional<Json> result;
    std::optional<FailureReason> failure_reason;
};

class TaskConstellation {
  public:
    TaskConstellation() = default;
    explicit TaskConstellation(std::string request) : request_(std::move(request)) {}

    const std::string& request() const noexcept { return request_; }
    void set_request(std::string r) { request_ = std::move(r); }
    std::uint64_t version() const noexcept { return version_; }

    const std::map<TaskId, TaskStar>& tasks() const noexcept { return tasks_; }
    const std::map<EdgeId, TaskStarLine>& edges() const noexcept { return edges_; }

    bool has_task(const TaskId& id) const { return tasks_.count(id) != 0; }
    bool has_edge(const EdgeId& id) const { return edges_.count(id) != 0; }
    const TaskStar& task(const TaskId& id) const;
    const TaskStarLine& edge(const EdgeId& id) const;

    // Incoming edge ids (the derived `dependencies` field), sorted.
    std::vector<EdgeId> incoming(const TaskId& id) const;
    std::vector<EdgeId> outgoing(const TaskId& id) const;
    std::optional<EdgeId> find_edge(const TaskId& from, const TaskId& to) const;

    // Single-op commits. Each validates, applies, and bumps the version by one.
    // On error the constellation is left untouched.
    void add_task(const TaskSpec& spec);
    void remove_task(const TaskId& id);
    void update_task(const TaskId& id, const TaskPatch& patch);
    void add_dependency(const TaskStarLine& spec);
    void remove_dependency(const EdgeId& id);
    void update_dependency(const EdgeId& id, const DependencyPatch& patch);

    // Orchestrator-driven status change. Checks legality, never bumps version.
    void transition(const TaskId& id, TaskStatus to, std::optional<Json> result = std::nullopt,
                    std::optional<FailureReason> reason = std::nullopt);

    // Monotone join of a terminal outcome. Re-applying the same terminal status
    // is a no-op. Returns false if the task already held that status.
    bool fold(const TaskOutcome& outcome);

    // Raw access for tests and deserialization. No checks.
    void insert_task_unchecked(TaskStar t);
    void insert_edge_unchecked(TaskStarLine e);
    void erase_task_unchecked(const TaskId& id);
    TaskStar& task_unchecked(const TaskId& id);
    void set_version(std::uint64_t v) noexcept { version_ = v; }

    bool operator==(const TaskConstellation&) const = default;

    // Same checks as the single-op commits but without the version bump or the
    // acyclicity check. Used to stage several ops of one delta.
    void stage_add_task(const TaskSpec& spec);
    void stage_remove_task(const TaskId& id);
    void stage_update_task(const TaskId& id, const TaskPatch& patch);
    void stage_add_dependency(const TaskStarLine& spec);
    void stage_remove_dependency(const EdgeId& id);
    void stage_update_dependency(const EdgeId& id, const DependencyPatch& patch);
    void require_acyclic() const;

  private:
    std::string request_;
    std::uint64_t version_ = 0;
    std::map<TaskId, TaskStar> tasks_;
    std::map<EdgeId, TaskStarLine> edges_;
};

// Atomic batch construction. With clear=true the result starts from an empty
// graph (only allowed while every existing task is PENDING). Collects every
// violation before failing with ValidationFailed.
TaskConstellation build_constellation(const BuildConfig& config, bool clear,
                                      const TaskConstellation& base = TaskConstellation{});

// Pure. Empty result means valid.
std::vector<Violation> validate(const TaskConstellation& c);

// Topological order, ties broken by id. nullopt if cyclic.
std::optional<std::vector<TaskId>> topological_order(const TaskConstellation& c);

}  // namespace constellation
