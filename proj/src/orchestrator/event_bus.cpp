#include "constellation/orchestrator/event_bus.hpp"

#include <algorithm>
#include <exception>

#include "constellation/util/log.hpp"

namespace constellation {

EventBus::SubscriptionId EventBus::subscribe(EventKind kind, Handler h) {
    subs_.push_back({next_, kind, std::move(h)});
    return next_++;
}

EventBus::SubscriptionId EventBus::subscribe_all(Handler h) {
    subs_.push_back({next_, std::nullopt, std::move(h)});
    return next_++;
}

void EventBus::unsubscribe(SubscriptionId id) {
    subs_.erase(std::remove_if(subs_.begin(), subs_.end(), [id](const Sub& s) { return s.id == id; }), subs_.end());
}

void EventBus::publish(const OrchestratorEvent& e) {
    // Copy so handlers may subscribe or unsubscribe while we iterate.
    auto subs = subs_;
    for (const auto& s : subs) {
        if (s.kind && *s.kind != e.kind) continue;
        try {
            s.handler(e);
        } catch (const std::exception& ex) {
            ++failures_;
            log::warn("bus", std::string("handler failed: ") + ex.what());
        } catch (...) {
            ++failures_;
            log::warn("bus", "handler failed");
        }
    }
}

}  // namespace constellation
