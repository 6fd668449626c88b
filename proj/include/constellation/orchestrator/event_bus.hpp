#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "constellation/core/event.hpp"

namespace constellation {

// Observer registry. Handlers run in subscription order on the publishing
// context; a throwing handler is logged and skipped.
class EventBus {
  public:
    using Handler = std::function<void(const OrchestratorEvent&)>;
    using SubscriptionId = std::size_t;

    SubscriptionId subscribe(EventKind kind, Handler h);
    SubscriptionId subscribe_all(Handler h);
    void unsubscribe(SubscriptionId id);

    void publish(const OrchestratorEvent& e);

    std::size_t handler_failures() const { return failures_; }

  private:
    struct Sub {
        SubscriptionId id;
        std::optional<EventKind> kind;
        Handler handler;
    };
    std::vector<Sub> subs_;
    SubscriptionId next_ = 1;
    std::size_t failures_ = 0;
};

}  // namespace constellation
