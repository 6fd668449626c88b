#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "constellation/core/readiness.hpp"
#include "constellation/core/serialize.hpp"
#include "oracles.hpp"

namespace testutil {

inline std::string source_path(const std::string& rel) {
    return std::string(CONSTELLATION_SOURCE_DIR) + "/" + rel;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline constellation::TaskConstellation fig4() {
    return constellation::deserialize_text(read_file(source_path("scenarios/fig4.json")));
}

inline std::string tid(int i) {
    return "t" + std::to_string(i);
}

inline constellation::TaskStatus to_status(oracle::St s) {
    using constellation::TaskStatus;
    switch (s) {
        case oracle::St::P: return TaskStatus::Pending;
        case oracle::St::R: return TaskStatus::Running;
        case oracle::St::C: return TaskStatus::Completed;
        case oracle::St::F: return TaskStatus::Failed;
    }
    return TaskStatus::Pending;
}

// Mirrors an oracle graph into a constellation. Condition ids encode the
// predicate value and are registered in `reg`.
inline constellation::TaskConstellation to_constellation(const oracle::Graph& g,
                                                         constellation::ConditionRegistry& reg) {
    using namespace constellation;
    reg.add_constant("yes", true);
    reg.add_constant("no", false);
    TaskConstellation c("random");
    for (int i = 0; i < g.n; ++i) {
        TaskStar t = TaskStar::from_spec(TaskSpec{tid(i), tid(i), "", {}, "dev" + std::to_string(i % 3)});
        t.status = to_status(g.st[i]);
        if (is_terminal(t.status)) t.result = Json{{"ok", t.status == TaskStatus::Completed}};
        if (t.status == TaskStatus::Failed) t.failure_reason = FailureReason::ExecutionError;
        c.insert_task_unchecked(t);
    }
    int k = 0;
    for (const auto& e : g.edges) {
        DependencyType dt;
        if (e.type == oracle::Ty::Uncond) dt = DependencyType::unconditional();
        else if (e.type == oracle::Ty::Success) dt = DependencyType::success_only();
        else dt = DependencyType::conditional(e.cond_value ? "yes" : "no");
        c.insert_edge_unchecked(TaskStarLine{"e" + std::to_string(k++), tid(e.from), tid(e.to), dt, ""});
    }
    return c;
}

}  // namespace testutil
