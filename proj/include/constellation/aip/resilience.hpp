#pragma once

#include <cstdint>
#include <vector>

#include "constellation/util/rng.hpp"

namespace constellation::aip {

struct BackoffPolicy {
    double base = 1.0;
    double multiplier = 2.0;
    double max_delay = 30.0;
    int max_attempts = 5;
    double jitter = 0.10;  // fraction of the nominal delay, both ways

    // min(base * multiplier^n, max_delay), n counted from 0.
    double nominal_delay(int n) const;
    // Nominal delay scaled by a factor drawn from [1 - jitter, 1 + jitter].
    double delay(int n, Rng& rng) const;
    // Upper bound on the time from the drop to the last attempt.
    double exhaustion_bound() const;
};

struct HeartbeatPolicy {
    double interval = 5.0;
    int missed = 3;

    // A peer last heard from at `last_seen` counts as gone at `now`.
    bool expired(double last_seen, double now) const;
    // First tick strictly after t. Ticks sit on multiples of the interval.
    double next_tick(double t) const;
};

struct ReconnectAttempt {
    std::string device;
    int attempt = 0;  // 1-based
    double at = 0.0;
    bool success = false;
};

}  // namespace constellation::aip
