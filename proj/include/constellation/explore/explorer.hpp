#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "constellation/explore/model.hpp"

namespace constellation::explore {

struct Witness {
    std::string invariant;
    std::vector<std::pair<Action, ModelState>> path;  // starts with (Init, initial)
};

struct ExploreStats {
    std::uint64_t states_generated = 0;
    std::uint64_t distinct_states = 0;
    int bfs_depth = 0;
    std::map<Action, std::uint64_t> first_discovery;
    std::uint64_t deadlocks = 0;
    std::vector<Witness> violations;
    std::uint64_t constraint_rejected = 0;
};

struct ExploreOptions {
    std::uint64_t max_states = 1'000'000;
    Mutations mutations;
    bool stop_at_first_violation = true;
};

// BFS from initial_state(). Throws BoundExceeded if more than max_states
// distinct states are found.
ExploreStats explore(const ExploreOptions& opt = {});

// Closed form 4^|T| * 2 * (sum_{k<=2} 2^k) * 2^|D|.
std::uint64_t analytic_distinct_count();

struct GoldenStats {
    std::uint64_t states_generated = 93633;
    std::uint64_t distinct_states = 7168;
    int bfs_depth = 8;
    std::map<Action, std::uint64_t> first_discovery{{Action::Init, 1},
                                                    {Action::Enqueue, 6},
                                                    {Action::Acquire, 448},
                                                    {Action::Dispatch, 441},
                                                    {Action::UpdateDevices, 6272}};
};

// Human-readable mismatches; empty when the stats match.
std::vector<std::string> compare_golden(const ExploreStats& s, const GoldenStats& g = {});

Json to_json(const ExploreStats& s);

// Extended mode: the real constellation code on a two-task graph t0 -> t1.
struct ExtendedStats {
    std::uint64_t states_generated = 0;
    std::uint64_t distinct_states = 0;
    int bfs_depth = 0;
    std::uint64_t rejected_deltas = 0;
    std::vector<std::string> violations;
};

ExtendedStats explore_extended(std::uint64_t max_states = 1'000'000);

Json to_json(const ExtendedStats& s);

}  // namespace constellation::explore
