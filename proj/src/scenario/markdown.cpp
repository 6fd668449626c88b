#include "constellation/scenario/markdown.hpp"

#include <iomanip>
#include <sstream>

namespace constellation::scenario {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << v;
    return os.str();
}

std::string opt_num(const std::optional<double>& v) {
    return v ? num(*v) : "-";
}

// Table cells and Mermaid labels must not break the surrounding syntax.
std::string cell(std::string s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else if (c == '\n') out += "<br>";
        else out += c;
    }
    return out;
}

std::string label(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"') out += "#quot;";
        else if (c == '\n') out += ' ';
        else out += c;
    }
    return out;
}

std::string edge_arrow(const TaskStarLine& e) {
    switch (e.dep_type.kind) {
        case DependencyType::Kind::Unconditional: return "-->";
        case DependencyType::Kind::SuccessOnly:   return "==>";
        case DependencyType::Kind::Conditional:   return "-.->";
    }
    return "-->";
}

}  // namespace

std::string mermaid(const TaskConstellation& c) {
    std::ostringstream os;
    os << "```mermaid\ngraph TD\n";
    std::map<TaskId, std::string> node;
    int i = 0;
    for (const auto& [id, t] : c.tasks()) {
        node[id] = "n" + std::to_string(i++);
        os << "  " << node[id] << "[\"" << label(id) << ": " << label(t.name) << "<br>" << label(t.device) << " / "
           << to_string(t.status) << "\"]\n";
    }
    for (const auto& [id, e] : c.edges()) {
        os << "  " << node[e.from_task] << " " << edge_arrow(e);
        if (e.dep_type.kind == DependencyType::Kind::Conditional) os << "|" << label(e.dep_type.condition_id) << "|";
        os << " " << node[e.to_task] << "\n";
    }
    os << "```\n";
    return os.str();
}

std::string emit_markdown_log(const RunReport& r, const std::optional<ParallelismMetrics>& metrics) {
    std::ostringstream os;
    os << "# Run log\n\n";
    os << "**Request:** " << cell(r.request) << "\n\n";
    os << "- Outcome: " << to_string(r.outcome) << "\n";
    os << "- Planner final state: " << to_string(r.planner_final_state) << "\n";
    os << "- Planner result: " << cell(r.planner_result) << "\n";
    if (r.error) os << "- Error: " << cell(*r.error) << "\n";
    os << "- Started: " << num(r.started_at) << " s, finished: " << num(r.finished_at) << " s\n\n";

    os << "## Planner traces\n\n";
    if (r.planner_trace.empty()) os << "_No planner calls._\n";
    for (const auto& p : r.planner_trace) {
        os << "### " << (p.cycle < 0 ? std::string("create") : "cycle " + std::to_string(p.cycle)) << " at "
           << num(p.t) << " s (" << to_string(p.mode) << ")\n\n";
        os << "- Observation: " << cell(p.output.observation) << "\n";
        os << "- Thought: " << cell(p.output.thought) << "\n";
        os << "- Next state: " << to_string(p.output.next_state) << "\n";
        os << "- Ops: " << p.output.delta.ops.size() << "\n";
        if (p.rejected) os << "- Rejected: " << cell(*p.rejected) << "\n";
        os << "\n";
    }

    os << "## Initial constellation\n\n" << mermaid(r.initial) << "\n";
    os << "## Final constellation\n\n" << mermaid(r.final_constellation) << "\n";

    os << "## Tasks\n\n";
    os << "| Task | Device | Status | Start (s) | End (s) | Duration (s) |\n";
    os << "|---|---|---|---|---|---|\n";
    for (const auto& [id, t] : r.final_constellation.tasks()) {
        TaskTiming tm;
        if (auto it = r.timings.find(id); it != r.timings.end()) tm = it->second;
        os << "| " << cell(id) << " | " << cell(t.device) << " | " << to_string(t.status);
        if (t.failure_reason) os << " (" << to_string(*t.failure_reason) << ")";
        os << " | " << opt_num(tm.start) << " | " << opt_num(tm.end) << " | "
           << (tm.start && tm.end ? num(tm.duration()) : "-") << " |\n";
    }
    os << "\n## Event timeline\n\n";
    os << "| Time (s) | Event | Task | Device |\n|---|---|---|---|\n";
    for (const auto& e : r.events)
        os << "| " << num(e.timestamp) << " | " << to_string(e.kind) << " | " << cell(e.task_id.value_or("-"))
           << " | " << cell(e.device.value_or("-")) << " |\n";

    os << "\n## Edit cycles\n\n";
    os << "| Cycle | Start (s) | End (s) | Batch | +Tasks | -Tasks | ~Tasks | +Deps | -Deps | ~Deps | State |\n";
    os << "|---|---|---|---|---|---|---|---|---|---|---|\n";
    int tot[6] = {0, 0, 0, 0, 0, 0};
    for (const auto& c : r.edit_cycles) {
        const auto& s = c.summary;
        int n[6] = {s.added_tasks,        s.removed_tasks,        s.modified_tasks,
                    s.added_dependencies, s.removed_dependencies, s.modified_dependencies};
        os << "| " << c.index << " | " << num(c.start) << " | " << num(c.end) << " | " << c.batch.size();
        for (int k = 0; k < 6; ++k) {
            os << " | " << n[k];
            tot[k] += n[k];
        }
        os << " | " << to_string(c.planner_state) << " |\n";
    }
    os << "| total | | | ";
    for (int k = 0; k < 6; ++k) os << " | " << tot[k];
    os << " | |\n";

    if (metrics) {
        os << "\n## Metrics\n\n";
        os << "- Total work W: " << num(metrics->total_work) << " s\n";
        os << "- Critical path L: " << num(metrics->critical_path) << " s\n";
        os << "- Parallelism ratio P: " << num(metrics->parallelism_ratio) << "\n";
        os << "- Max parallel width: " << metrics->max_parallel_width << "\n";
        os << "- Observed peak: " << metrics->observed_peak << "\n";
    }
    return os.str();
}

}  // namespace constellation::scenario
