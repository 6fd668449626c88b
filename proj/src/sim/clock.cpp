#include "constellation/sim/clock.hpp"

#include <algorithm>

namespace constellation::sim {

TimerId VirtualClock::post_after(double delay, std::function<void()> fn) {
    return post_at(now_ + std::max(0.0, delay), std::move(fn));
}

TimerId VirtualClock::post_at(double when, std::function<void()> fn) {
    when = std::max(when, now_);
    auto id = ++seq_;
    Key k{when, id};
    timers_.emplace(k, std::move(fn));
    index_.emplace(id, k);
    return id;
}

void VirtualClock::cancel(TimerId id) {
    auto it = index_.find(id);
    if (it == index_.end()) return;
    timers_.erase(it->second);
    index_.erase(it);
}

double VirtualClock::next_time() const {
    return timers_.empty() ? std::numeric_limits<double>::infinity() : timers_.begin()->first.first;
}

bool VirtualClock::step() {
    if (timers_.empty()) return false;
    auto it = timers_.begin();
    auto [when, id] = it->first;
    auto fn = std::move(it->second);
    timers_.erase(it);
    index_.erase(id);
    now_ = when;
    fn();
    return true;
}

std::size_t VirtualClock::run(double until) {
    stopped_ = false;
    std::size_t n = 0;
    while (!stopped_ && !timers_.empty() && next_time() <= until) {
        step();
        ++n;
    }
    return n;
}

}  // namespace constellation::sim
