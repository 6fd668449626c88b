#include "constellation/runtime/real_time.hpp"

#include <algorithm>

namespace constellation {

RealTimeContext::RealTimeContext() : origin_(Clock::now()) {}

double RealTimeContext::now() const {
    return std::chrono::duration<double>(Clock::now() - origin_).count();
}

TimerId RealTimeContext::post_after(double delay, std::function<void()> fn) {
    auto due = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                  std::chrono::duration<double>(std::max(0.0, delay)));
    std::lock_guard lk(mu_);
    auto id = ++seq_;
    Key k{due, id};
    timers_.emplace(k, std::move(fn));
    index_.emplace(id, k);
    cv_.notify_all();
    return id;
}

void RealTimeContext::cancel(TimerId id) {
    std::lock_guard lk(mu_);
    auto it = index_.find(id);
    if (it == index_.end()) return;
    timers_.erase(it->second);
    index_.erase(it);
}

void RealTimeContext::stop() {
    std::lock_guard lk(mu_);
    stopped_ = true;
    cv_.notify_all();
}

void RealTimeContext::run(bool until_idle) {
    std::unique_lock lk(mu_);
    stopped_ = false;
    for (;;) {
        if (stopped_) return;
        if (timers_.empty()) {
            if (until_idle) return;
            cv_.wait(lk);
            continue;
        }
        auto it = timers_.begin();
        if (it->first.first > Clock::now()) {
            cv_.wait_until(lk, it->first.first);
            continue;
        }
        auto fn = std::move(it->second);
        index_.erase(it->first.second);
        timers_.erase(it);
        // Callbacks post and cancel, so the lock is dropped while they run.
        lk.unlock();
        fn();
        lk.lock();
    }
}

}  // namespace constellation
