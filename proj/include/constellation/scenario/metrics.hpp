#pragma once

#include <map>

#include "constellation/orchestrator/report.hpp"

namespace constellation::scenario {

struct ParallelismMetrics {
    double total_work = 0.0;     // W
    double critical_path = 0.0;  // L
    int max_parallel_width = 0;  // infinite-device replay of the final DAG
    double parallelism_ratio = 0.0;  // W / L, 0 when L = 0
    int observed_peak = 0;       // peak RUNNING count in the actual timeline
};

Json to_json(const ParallelismMetrics& m);

// Durations of tasks missing from the map count as zero.
ParallelismMetrics compute_metrics(const TaskConstellation& c, const std::map<TaskId, double>& durations);

// Throws IncompleteRun if a task of the final constellation is not terminal.
ParallelismMetrics compute_metrics(const RunReport& report, const TaskConstellation& c);

}  // namespace constellation::scenario
