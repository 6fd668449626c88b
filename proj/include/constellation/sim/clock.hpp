#pragma once

#include <functional>
#include <limits>
#include <map>
#include <unordered_map>

#include "constellation/runtime/context.hpp"

namespace constellation::sim {

// Deterministic discrete-event clock. Timers fire in (time, sequence) order.
class VirtualClock final : public ControlContext {
  public:
    double now() const override { return now_; }
    TimerId post_after(double delay, std::function<void()> fn) override;
    TimerId post_at(double when, std::function<void()> fn);
    void cancel(TimerId id) override;

    // Fires the next timer. False when nothing is pending.
    bool step();
    // Runs until no timers remain, stop() is called, or the next timer is
    // later than `until`. Returns the number of timers fired.
    std::size_t run(double until = std::numeric_limits<double>::infinity());
    void stop() { stopped_ = true; }
    bool stopped() const { return stopped_; }

    std::size_t pending() const { return timers_.size(); }
    double next_time() const;

  private:
    using Key = std::pair<double, std::uint64_t>;
    double now_ = 0.0;
    std::uint64_t seq_ = 0;
    bool stopped_ = false;
    std::map<Key, std::function<void()>> timers_;
    std::unordered_map<TimerId, Key> index_;
};

}  // namespace constellation::sim
