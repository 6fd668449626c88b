#pragma once

#include <cstdint>
#include <functional>

namespace constellation {

using TimerId = std::uint64_t;

// The single logical control context. Everything except event enqueueing
// runs on it. Time is in seconds.
class ControlContext {
  public:
    virtual ~ControlContext() = default;

    virtual double now() const = 0;
    // Runs fn on the control context no earlier than now() + delay. Callbacks
    // due at the same time run in posting order.
    virtual TimerId post_after(double delay, std::function<void()> fn) = 0;
    virtual void cancel(TimerId id) = 0;

    TimerId post(std::function<void()> fn) { return post_after(0.0, std::move(fn)); }
};

}  // namespace constellation
