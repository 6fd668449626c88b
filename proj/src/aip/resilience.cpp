#include "constellation/aip/resilience.hpp"

#include <algorithm>
#include <cmath>

namespace constellation::aip {

double BackoffPolicy::nominal_delay(int n) const {
    return std::min(base * std::pow(multiplier, n), max_delay);
}

double BackoffPolicy::delay(int n, Rng& rng) const {
    return nominal_delay(n) * (1.0 + jitter * rng.uniform(-1.0, 1.0));
}

double BackoffPolicy::exhaustion_bound() const {
    double total = 0.0;
    for (int n = 0; n < max_attempts; ++n) total += nominal_delay(n);
    return total * (1.0 + jitter);
}

bool HeartbeatPolicy::expired(double last_seen, double now) const {
    return now - last_seen >= interval * missed - 1e-9;
}

double HeartbeatPolicy::next_tick(double t) const {
    return (std::floor(t / interval + 1e-9) + 1.0) * interval;
}

}  // namespace constellation::aip
