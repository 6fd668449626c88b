#include "constellation/scenario/metrics.hpp"

#include <algorithm>
#include <set>

#include "constellation/error.hpp"

namespace constellation::scenario {

namespace {

// Kahn's order; ties broken by id so results never depend on insertion.
std::vector<TaskId> topo_order(const TaskConstellation& c) {
    std::map<TaskId, int> indeg;
    for (const auto& [id, t] : c.tasks()) indeg[id] = 0;
    for (const auto& [id, e] : c.edges()) ++indeg[e.to_task];
    std::set<TaskId> ready;
    for (const auto& [id, n] : indeg)
        if (n == 0) ready.insert(id);
    std::vector<TaskId> out;
    while (!ready.empty()) {
        auto v = *ready.begin();
        ready.erase(ready.begin());
        out.push_back(v);
        for (const auto& eid : c.outgoing(v))
            if (--indeg[c.edge(eid).to_task] == 0) ready.insert(c.edge(eid).to_task);
    }
    if (out.size() != c.tasks().size()) throw Error(ErrorCode::CycleIntroduced, "metrics need an acyclic graph");
    return out;
}

// Peak overlap of [start, end) intervals; empty intervals never count.
int peak(std::vector<std::pair<double, double>> iv) {
    std::vector<std::pair<double, int>> ev;
    for (auto [s, e] : iv)
        if (e > s) {
            ev.emplace_back(s, +1);
            ev.emplace_back(e, -1);
        }
    // Ends sort before starts at the same instant.
    std::sort(ev.begin(), ev.end());
    int cur = 0, best = 0;
    for (auto [t, d] : ev) {
        cur += d;
        best = std::max(best, cur);
    }
    return best;
}

}  // namespace

ParallelismMetrics compute_metrics(const TaskConstellation& c, const std::map<TaskId, double>& durations) {
    auto dur = [&](const TaskId& id) {
        auto it = durations.find(id);
        return it == durations.end() ? 0.0 : it->second;
    };
    ParallelismMetrics m;
    std::map<TaskId, double> start, end;
    std::vector<std::pair<double, double>> iv;
    for (const auto& v : topo_order(c)) {
        double s = 0.0;
        for (const auto& eid : c.incoming(v)) s = std::max(s, end.at(c.edge(eid).from_task));
        start[v] = s;
        end[v] = s + dur(v);
        m.total_work += dur(v);
        m.critical_path = std::max(m.critical_path, end[v]);
        iv.emplace_back(start[v], end[v]);
    }
    m.max_parallel_width = peak(iv);
    m.parallelism_ratio = m.critical_path > 0 ? m.total_work / m.critical_path : 0.0;
    return m;
}

ParallelismMetrics compute_metrics(const RunReport& report, const TaskConstellation& c) {
    std::vector<std::string> open;
    for (const auto& [id, t] : c.tasks())
        if (!is_terminal(t.status)) open.push_back(id);
    if (!open.empty())
        throw Error(ErrorCode::IncompleteRun, std::to_string(open.size()) + " task(s) not terminal",
                    {Violation{ErrorCode::IncompleteRun, "task not terminal", open}});
    std::map<TaskId, double> d;
    std::vector<std::pair<double, double>> actual;
    for (const auto& [id, t] : c.tasks()) {
        auto it = report.timings.find(id);
        if (it == report.timings.end()) continue;
        d[id] = it->second.duration();
        if (it->second.start && it->second.end) actual.emplace_back(*it->second.start, *it->second.end);
    }
    auto m = compute_metrics(c, d);
    m.observed_peak = peak(actual);
    return m;
}

Json to_json(const ParallelismMetrics& m) {
    return Json{{"total_work", round_time(m.total_work)},
                {"critical_path", round_time(m.critical_path)},
                {"max_parallel_width", m.max_parallel_width},
                {"parallelism_ratio", round_time(m.parallelism_ratio)},
                {"observed_peak", m.observed_peak}};
}

}  // namespace constellation::scenario
