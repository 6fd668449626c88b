#include "constellation/explore/explorer.hpp"

#include <deque>
#include <set>
#include <unordered_map>

#include "constellation/core/delta.hpp"
#include "constellation/core/readiness.hpp"
#include "constellation/core/serialize.hpp"
#include "constellation/error.hpp"

namespace constellation::explore {

namespace {

struct Seen {
    std::uint64_t parent;
    Action action;
    int depth;
};

Witness build_witness(const std::unordered_map<std::uint64_t, Seen>& seen, std::uint64_t code,
                      std::string invariant) {
    Witness w;
    w.invariant = std::move(invariant);
    for (;;) {
        const auto& info = seen.at(code);
        w.path.emplace_back(info.action, decode(code));
        if (info.action == Action::Init) break;
        code = info.parent;
    }
    std::reverse(w.path.begin(), w.path.end());
    return w;
}

}  // namespace

ExploreStats explore(const ExploreOptions& opt) {
    ExploreStats st;
    for (auto a : kActions) st.first_discovery[a] = 0;

    std::unordered_map<std::uint64_t, Seen> seen;
    std::deque<std::uint64_t> frontier;

    auto init = initial_state();
    auto init_code = encode(init);
    seen.emplace(init_code, Seen{init_code, Action::Init, 1});
    st.first_discovery[Action::Init] = 1;
    st.states_generated = 1;
    frontier.push_back(init_code);

    auto check = [&](std::uint64_t code, const ModelState& s) {
        for (auto& inv : check_invariants(s)) st.violations.push_back(build_witness(seen, code, inv));
    };
    check(init_code, init);

    while (!frontier.empty()) {
        if (opt.stop_at_first_violation && !st.violations.empty()) break;
        auto code = frontier.front();
        frontier.pop_front();
        const int depth = seen.at(code).depth;
        st.bfs_depth = std::max(st.bfs_depth, depth);
        auto s = decode(code);

        std::size_t enabled = 0;
        for (auto& [action, next] : successors(s, opt.mutations)) {
            st.states_generated++;
            if (!within_bound(next)) {
                st.constraint_rejected++;
                continue;
            }
            enabled++;
            auto nc = encode(next);
            if (seen.count(nc)) continue;
            if (seen.size() >= opt.max_states)
                throw Error(ErrorCode::BoundExceeded,
                            "more than " + std::to_string(opt.max_states) + " distinct states");
            seen.emplace(nc, Seen{code, action, depth + 1});
            st.first_discovery[action]++;
            frontier.push_back(nc);
            check(nc, next);
        }
        if (enabled == 0) st.deadlocks++;
    }
    st.distinct_states = seen.size();
    return st;
}

std::uint64_t analytic_distinct_count() {
    // Per task: PENDING with A = NULL, or RUNNING on one of the devices.
    std::uint64_t per_task = 1 + kDevices;
    std::uint64_t tasks = 1;
    for (int i = 0; i < kTasks; ++i) tasks *= per_task;
    std::uint64_t queues = 0;
    for (int k = 0, p = 1; k <= kQueueBound; ++k, p *= 2) queues += p;
    return tasks * 2 * queues * (1u << kDevices);
}

std::vector<std::string> compare_golden(const ExploreStats& s, const GoldenStats& g) {
    std::vector<std::string> out;
    auto cmp = [&](const std::string& what, std::uint64_t got, std::uint64_t want) {
        if (got != want)
            out.push_back(what + ": got " + std::to_string(got) + ", expected " + std::to_string(want));
    };
    cmp("distinct_states", s.distinct_states, g.distinct_states);
    cmp("bfs_depth", static_cast<std::uint64_t>(s.bfs_depth), static_cast<std::uint64_t>(g.bfs_depth));
    cmp("states_generated", s.states_generated, g.states_generated);
    for (auto a : kActions) {
        auto it = g.first_discovery.find(a);
        auto want = it == g.first_discovery.end() ? 0 : it->second;
        auto got = s.first_discovery.count(a) ? s.first_discovery.at(a) : 0;
        cmp("first_discovery." + std::string(to_string(a)), got, want);
    }
    cmp("invariant_violations", s.violations.size(), 0);
    cmp("deadlocks", s.deadlocks, 0);
    return out;
}

Json to_json(const ExploreStats& s) {
    Json fd = Json::object();
    for (const auto& [a, n] : s.first_discovery) fd[std::string(to_string(a))] = n;
    Json vs = Json::array();
    for (const auto& w : s.violations) {
        Json path = Json::array();
        for (const auto& [a, st] : w.path) path.push_back({{"action", to_string(a)}, {"state", describe(st)}});
        vs.push_back({{"invariant", w.invariant}, {"witness", path}});
    }
    return Json{{"schema", "constellation.explore-stats.v1"},
                {"mode", "tla-mirror"},
                {"states_generated", s.states_generated},
                {"distinct_states", s.distinct_states},
                {"bfs_depth", s.bfs_depth},
                {"first_discovery", fd},
                {"deadlocks", s.deadlocks},
                {"constraint_rejected", s.constraint_rejected},
                {"violations", vs}};
}

// ---------------------------------------------------------------------------
// Extended mode

namespace {

constexpr int kExtDevices = 2;

struct ExtEvent {
    TaskId task;
    bool ok;
    bool operator==(const ExtEvent&) const = default;
};

struct ExtState {
    TaskConstellation c;
    std::map<TaskId, int> A;  // absent = NULL
    bool held = false;
    std::vector<ExtEvent> Q;
    unsigned D = (1u << kExtDevices) - 1;
    std::set<TaskId> reported;

    std::string key() const {
        auto doc = serialize(c);
        doc["version"] = 0;
        Json q = Json::array();
        for (const auto& e : Q) q.push_back({e.task, e.ok});
        Json j{{"c", doc}, {"A", A}, {"L", held}, {"Q", q}, {"D", D}, {"reported", reported}};
        return j.dump();
    }
};

ExtState ext_initial() {
    ExtState s;
    BuildConfig cfg;
    cfg.tasks = {TaskSpec{"t0", "t0", "", {}, "dev0"}, TaskSpec{"t1", "t1", "", {}, "dev1"}};
    cfg.dependencies = {TaskStarLine{"e0", "t0", "t1", DependencyType::success_only(), ""}};
    s.c = build_constellation(cfg, true, TaskConstellation("extended"));
    return s;
}

std::vector<EditDelta> delta_menu(const TaskConstellation& c) {
    std::vector<EditDelta> m;
    m.push_back({});
    for (const auto& [id, t] : c.tasks()) {
        TaskPatch p;
        p.description = t.description.empty() ? "enriched" : "";
        m.push_back(EditDelta{{op::UpdateTask{id, p}}, ""});
    }
    if (c.has_edge("e0"))
        m.push_back(EditDelta{{op::RemoveDependency{"e0"}}, ""});
    else
        m.push_back(EditDelta{{op::AddDependency{{"e0", "t0", "t1", DependencyType::success_only(), ""}}}, ""});
    m.push_back(EditDelta{{op::AddDependency{{"e1", "t1", "t0", DependencyType::unconditional(), ""}}}, ""});
    return m;
}

TaskOutcome outcome_of(const ExtEvent& e) {
    TaskOutcome o;
    o.task_id = e.task;
    o.status = e.ok ? TaskStatus::Completed : TaskStatus::Failed;
    o.result = Json{{"ok", e.ok}};
    if (!e.ok) o.failure_reason = FailureReason::ExecutionError;
    return o;
}

}  // namespace

ExtendedStats explore_extended(std::uint64_t max_states) {
    ExtendedStats st;
    std::set<std::string> seen;
    std::deque<std::pair<ExtState, int>> frontier;

    auto init = ext_initial();
    seen.insert(init.key());
    frontier.emplace_back(init, 1);
    st.states_generated = 1;

    auto check = [&](const ExtState& s) {
        for (const auto& [id, t] : s.c.tasks()) {
            if (t.status == TaskStatus::Running && !s.A.count(id))
                st.violations.push_back("I1: " + id + " RUNNING without assignment");
        }
        for (const auto& v : validate(s.c)) st.violations.push_back("I2: " + constellation::describe(std::vector<Violation>{v}));
    };
    check(init);

    while (!frontier.empty()) {
        auto [s, depth] = std::move(frontier.front());
        frontier.pop_front();
        st.bfs_depth = std::max(st.bfs_depth, depth);

        std::vector<ExtState> next;
        // Runtime: a RUNNING task reports its outcome once.
        for (const auto& [id, t] : s.c.tasks()) {
            if (t.status != TaskStatus::Running || s.reported.count(id) || s.Q.size() >= 2) continue;
            for (bool ok : {true, false}) {
                auto n = s;
                n.Q.push_back({id, ok});
                n.reported.insert(id);
                next.push_back(std::move(n));
            }
        }
        if (!s.held) {
            auto n = s;
            n.held = true;
            next.push_back(std::move(n));
        } else {
            auto n = s;
            n.held = false;
            next.push_back(std::move(n));
        }
        if (s.held && !s.Q.empty()) {
            auto e = s.Q.front();
            for (const auto& delta : delta_menu(s.c)) {
                ApplyResult applied;
                try {
                    applied = apply_delta(s.c, delta);
                } catch (const Error&) {
                    st.rejected_deltas++;
                    continue;
                }
                if (!respects_locality(s.c, applied.constellation))
                    st.violations.push_back("I3: delta changed a started task");
                auto n = s;
                n.Q.erase(n.Q.begin());
                n.c = applied.constellation;
                n.c.fold(outcome_of(e));
                // Confluence: folding first then editing must land in the same place.
                auto alt = s.c;
                alt.fold(outcome_of(e));
                try {
                    auto alt_applied = apply_delta(alt, delta).constellation;
                    if (serialize(alt_applied) != serialize(n.c))
                        st.violations.push_back("confluence: edit and sync do not commute");
                } catch (const Error& err) {
                    st.violations.push_back(std::string("confluence: ") + err.what());
                }
                next.push_back(std::move(n));
            }
        }
        if (!s.held) {
            for (const auto& t : ready_tasks(s.c)) {
                if (s.A.count(t)) continue;
                for (int d = 0; d < kExtDevices; ++d) {
                    if (!(s.D >> d & 1u)) continue;
                    auto n = s;
                    n.c.transition(t, TaskStatus::Running);
                    n.A[t] = d;
                    next.push_back(std::move(n));
                }
            }
        }
        for (unsigned sub = 0; sub < (1u << kExtDevices); ++sub) {
            auto n = s;
            n.D = sub;
            next.push_back(std::move(n));
        }
        next.push_back(s);

        for (auto& n : next) {
            st.states_generated++;
            auto k = n.key();
            if (!seen.insert(k).second) continue;
            if (seen.size() > max_states)
                throw Error(ErrorCode::BoundExceeded, "more than " + std::to_string(max_states) + " distinct states");
            check(n);
            frontier.emplace_back(std::move(n), depth + 1);
        }
    }
    st.distinct_states = seen.size();
    return st;
}

Json to_json(const ExtendedStats& s) {
    return Json{{"schema", "constellation.explore-stats.v1"},
                {"mode", "extended"},
                {"states_generated", s.states_generated},
                {"distinct_states", s.distinct_states},
                {"bfs_depth", s.bfs_depth},
                {"rejected_deltas", s.rejected_deltas},
                {"violations", s.violations}};
}

}  // namespace constellation::explore
