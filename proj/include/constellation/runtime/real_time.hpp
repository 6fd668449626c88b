#pragma once

#include <chrono>
#include <condition_variable>
#include <map>
#include <mutex>
#include <unordered_map>

#include "constellation/runtime/context.hpp"

namespace constellation {

// Wall-clock control context. Callbacks run one at a time on whichever
// thread calls run(); post_after and cancel may be called from any thread.
class RealTimeContext final : public ControlContext {
  public:
    RealTimeContext();

    // Seconds since construction.
    double now() const override;
    TimerId post_after(double delay, std::function<void()> fn) override;
    void cancel(TimerId id) override;

    // Blocks until stop() is called, or until nothing is pending when
    // `until_idle` is set.
    void run(bool until_idle = false);
    void stop();

  private:
    using Clock = std::chrono::steady_clock;
    using Key = std::pair<Clock::time_point, std::uint64_t>;

    Clock::time_point origin_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::uint64_t seq_ = 0;
    bool stopped_ = false;
    std::map<Key, std::function<void()>> timers_;
    std::unordered_map<TimerId, Key> index_;
};

}  // namespace constellation
