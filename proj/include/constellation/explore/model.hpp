#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "constellation/core/types.hpp"

namespace constellation::explore {

inline constexpr int kTasks = 3;
inline constexpr int kDevices = 3;
inline constexpr int kQueueBound = 2;
inline constexpr std::int8_t kNull = -1;

enum class Action { Init, Enqueue, Acquire, DrainOrNoop, Release, Dispatch, UpdateDevices, Noop };
inline constexpr std::array<Action, 8> kActions{Action::Init,     Action::Enqueue,       Action::Acquire,
                                                Action::DrainOrNoop, Action::Release,  Action::Dispatch,
                                                Action::UpdateDevices, Action::Noop};

std::string_view to_string(Action a);

enum class QEvent : std::uint8_t { Completed = 0, Failed = 1 };

// One state of the stubbed model: graph fixed (V = tasks, E = empty).
struct ModelState {
    std::array<TaskStatus, kTasks> S{TaskStatus::Pending, TaskStatus::Pending, TaskStatus::Pending};
    std::array<std::int8_t, kTasks> A{kNull, kNull, kNull};
    bool held = false;
    std::vector<QEvent> Q;
    std::uint8_t D = (1u << kDevices) - 1;  // bit i set => dev i available
    // Ghost flag, only ever set by the dispatch_while_held mutation.
    bool assigned_while_held = false;

    bool operator==(const ModelState&) const = default;
};

// Injective on every state with |Q| <= 7.
std::uint64_t encode(const ModelState& s);
ModelState decode(std::uint64_t code);

std::string describe(const ModelState& s);

// Deliberately broken variants used to show the checker catches real bugs.
struct Mutations {
    bool dispatch_without_assignment = false;  // Dispatch sets RUNNING but leaves A[t] NULL
    bool dispatch_while_held = false;          // Dispatch also enabled when L = held
};

ModelState initial_state();

bool ready(const ModelState& s, int t);

// Every successor in enumeration order, including ones the queue bound rejects.
std::vector<std::pair<Action, ModelState>> successors(const ModelState& s, const Mutations& m = {});

bool within_bound(const ModelState& s);

// Names of violated invariants: TypeOK, I1, I2, LockExclusion.
std::vector<std::string> check_invariants(const ModelState& s);

}  // namespace constellation::explore
