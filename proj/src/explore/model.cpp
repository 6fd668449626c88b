#include "constellation/explore/model.hpp"

#include <sstream>

namespace constellation::explore {

std::string_view to_string(Action a) {
    switch (a) {
        case Action::Init:          return "Init";
        case Action::Enqueue:       return "Enqueue";
        case Action::Acquire:       return "Acquire";
        case Action::DrainOrNoop:   return "DrainOrNoop";
        case Action::Release:       return "Release";
        case Action::Dispatch:      return "Dispatch";
        case Action::UpdateDevices: return "UpdateDevices";
        case Action::Noop:          return "Noop";
    }
    return "?";
}

// Layout, low bits first: S 2x3, A 2x3 (3 = NULL), L 1, ghost 1, D 3, |Q| 3, Q 1 per slot.
std::uint64_t encode(const ModelState& s) {
    std::uint64_t x = 0;
    int sh = 0;
    for (int t = 0; t < kTasks; ++t, sh += 2) x |= std::uint64_t(static_cast<int>(s.S[t])) << sh;
    for (int t = 0; t < kTasks; ++t, sh += 2) x |= std::uint64_t(s.A[t] == kNull ? 3 : s.A[t]) << sh;
    x |= std::uint64_t(s.held) << sh++;
    x |= std::uint64_t(s.assigned_while_held) << sh++;
    x |= std::uint64_t(s.D & 7u) << sh;
    sh += 3;
    x |= std::uint64_t(s.Q.size() & 7u) << sh;
    sh += 3;
    for (std::size_t i = 0; i < s.Q.size(); ++i) x |= std::uint64_t(s.Q[i]) << (sh + i);
    return x;
}

ModelState decode(std::uint64_t x) {
    ModelState s;
    int sh = 0;
    for (int t = 0; t < kTasks; ++t, sh += 2) s.S[t] = static_cast<TaskStatus>((x >> sh) & 3u);
    for (int t = 0; t < kTasks; ++t, sh += 2) {
        auto a = (x >> sh) & 3u;
        s.A[t] = a == 3 ? kNull : static_cast<std::int8_t>(a);
    }
    s.held = (x >> sh++) & 1u;
    s.assigned_while_held = (x >> sh++) & 1u;
    s.D = (x >> sh) & 7u;
    sh += 3;
    auto n = (x >> sh) & 7u;
    sh += 3;
    s.Q.clear();
    for (std::size_t i = 0; i < n; ++i) s.Q.push_back(static_cast<QEvent>((x >> (sh + i)) & 1u));
    return s;
}

std::string describe(const ModelState& s) {
    std::ostringstream os;
    os << "S=[";
    for (int t = 0; t < kTasks; ++t) os << (t ? "," : "") << constellation::to_string(s.S[t]);
    os << "] A=[";
    for (int t = 0; t < kTasks; ++t) {
        os << (t ? "," : "");
        if (s.A[t] == kNull) os << "NULL";
        else os << "dev" << int(s.A[t]);
    }
    os << "] L=" << (s.held ? "held" : "free") << " Q=<";
    for (std::size_t i = 0; i < s.Q.size(); ++i)
        os << (i ? "," : "") << (s.Q[i] == QEvent::Completed ? "TASK_COMPLETED" : "TASK_FAILED");
    os << "> D={";
    bool first = true;
    for (int d = 0; d < kDevices; ++d)
        if (s.D >> d & 1u) {
            os << (first ? "" : ",") << "dev" << d;
            first = false;
        }
    os << "}";
    return os.str();
}

ModelState initial_state() {
    return ModelState{};
}

bool ready(const ModelState& s, int t) {
    // E is empty under the stub, so the upstream clause is vacuous.
    return s.S[t] == TaskStatus::Pending;
}

std::vector<std::pair<Action, ModelState>> successors(const ModelState& s, const Mutations& m) {
    std::vector<std::pair<Action, ModelState>> out;
    for (auto e : {QEvent::Completed, QEvent::Failed}) {
        auto n = s;
        n.Q.push_back(e);
        out.emplace_back(Action::Enqueue, std::move(n));
    }
    if (!s.held) {
        auto n = s;
        n.held = true;
        out.emplace_back(Action::Acquire, std::move(n));
    }
    if (s.held) {
        auto n = s;
        // Apply and Synchronize are identity stubs, so EditStep only pops the head.
        if (!n.Q.empty()) n.Q.erase(n.Q.begin());
        out.emplace_back(Action::DrainOrNoop, std::move(n));
    }
    if (s.held) {
        auto n = s;
        n.held = false;
        out.emplace_back(Action::Release, std::move(n));
    }
    if (!s.held || m.dispatch_while_held) {
        for (int t = 0; t < kTasks; ++t) {
            if (!ready(s, t) || s.A[t] != kNull) continue;
            for (int d = 0; d < kDevices; ++d) {
                if (!(s.D >> d & 1u)) continue;
                auto n = s;
                n.S[t] = TaskStatus::Running;
                if (!m.dispatch_without_assignment) n.A[t] = static_cast<std::int8_t>(d);
                if (s.held) n.assigned_while_held = true;
                out.emplace_back(Action::Dispatch, std::move(n));
            }
        }
    }
    for (std::uint8_t sub = 0; sub < (1u << kDevices); ++sub) {
        auto n = s;
        n.D = sub;
        out.emplace_back(Action::UpdateDevices, std::move(n));
    }
    out.emplace_back(Action::Noop, s);
    return out;
}

bool within_bound(const ModelState& s) {
    return static_cast<int>(s.Q.size()) <= kQueueBound;
}

std::vector<std::string> check_invariants(const ModelState& s) {
    std::vector<std::string> out;
    bool type_ok = within_bound(s) && s.D < (1u << kDevices);
    for (int t = 0; t < kTasks; ++t)
        if (s.A[t] != kNull && (s.A[t] < 0 || s.A[t] >= kDevices)) type_ok = false;
    if (!type_ok) out.emplace_back("TypeOK");
    for (int t = 0; t < kTasks; ++t) {
        if (s.S[t] == TaskStatus::Running && (s.A[t] == kNull)) {
            out.emplace_back("I1");
            break;
        }
    }
    // I2: IsDAG holds trivially under the stubbed Acyclic; E stays empty.
    if (s.assigned_while_held) out.emplace_back("LockExclusion");
    return out;
}

}  // namespace constellation::explore
