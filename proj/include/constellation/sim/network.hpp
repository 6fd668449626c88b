#pragma once

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "constellation/core/types.hpp"
#include "constellation/runtime/context.hpp"
#include "constellation/util/rng.hpp"

namespace constellation::sim {

using Bytes = std::string;
using NodeId = std::string;

inline constexpr double kForever = std::numeric_limits<double>::infinity();

struct Latency {
    double lo = 0.0;
    double hi = 0.0;  // equal to lo for a fixed latency
};

// Link is down on [down, up).
struct Outage {
    double down = 0.0;
    double up = kForever;
};

struct LinkSpec {
    NodeId a;
    NodeId b;
    Latency latency;
    std::vector<Outage> outages;
};

struct WireRecord {
    std::uint64_t id = 0;
    NodeId from;
    NodeId to;
    double sent = 0.0;
    std::optional<double> delivered;  // nullopt when dropped
    std::string label;                // from the classifier, e.g. the message type
    bool duplicate = false;           // injected copy
    Bytes bytes;
};

// Point-to-point simulated network. Frames on one directed link are delivered
// in send order.
class Network {
  public:
    using Handler = std::function<void(const NodeId& from, const Bytes& frame)>;
    using Classifier = std::function<std::string(const Bytes&)>;

    Network(ControlContext& ctx, std::uint64_t seed);

    // std::invalid_argument when outages overlap or are empty, or the latency
    // bounds are reversed.
    void add_link(const LinkSpec& spec);
    void attach(const NodeId& node, Handler h);
    void detach(const NodeId& node);

    bool has_link(const NodeId& a, const NodeId& b) const;
    bool link_up(const NodeId& a, const NodeId& b, double t) const;
    double now() const { return ctx_.now(); }

    // Returns the delivery time, or nullopt if dropped.
    std::optional<double> send(const NodeId& from, const NodeId& to, Bytes frame);

    void set_classifier(Classifier c) { classify_ = std::move(c); }
    // Frames whose label is in the set are delivered twice.
    void duplicate_labels(std::set<std::string> labels) { dup_labels_ = std::move(labels); }

    const std::vector<WireRecord>& wire_log() const { return log_; }
    void set_keep_bytes(bool keep) { keep_bytes_ = keep; }

  private:
    struct Link {
        LinkSpec spec;
        Rng rng;
        std::map<std::pair<NodeId, NodeId>, double> last_delivery;
    };
    Link* find(const NodeId& a, const NodeId& b);
    const Link* find(const NodeId& a, const NodeId& b) const;
    std::optional<double> transmit(Link& l, const NodeId& from, const NodeId& to, const Bytes& frame,
                                   const std::string& label, bool dup);

    ControlContext& ctx_;
    std::uint64_t seed_;
    std::map<std::pair<NodeId, NodeId>, Link> links_;
    std::map<NodeId, Handler> handlers_;
    Classifier classify_;
    std::set<std::string> dup_labels_;
    std::vector<WireRecord> log_;
    bool keep_bytes_ = true;
};

Json to_json(const WireRecord& r);

}  // namespace constellation::sim
