#pragma once

#include <optional>
#include <string>

#include "constellation/orchestrator/report.hpp"
#include "constellation/scenario/metrics.hpp"

namespace constellation::scenario {

std::string mermaid(const TaskConstellation& c);

// Run log: header, planner traces, initial and final DAGs, task table, event
// timeline, edit-cycle counts and metrics.
std::string emit_markdown_log(const RunReport& report, const std::optional<ParallelismMetrics>& metrics = std::nullopt);

}  // namespace constellation::scenario
