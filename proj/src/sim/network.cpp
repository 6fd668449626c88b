#include "constellation/sim/network.hpp"

#include <algorithm>
#include <stdexcept>

#include "constellation/core/event.hpp"

namespace constellation::sim {

namespace {
std::pair<NodeId, NodeId> key(const NodeId& a, const NodeId& b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}
}  // namespace

Network::Network(ControlContext& ctx, std::uint64_t seed) : ctx_(ctx), seed_(seed) {}

void Network::add_link(const LinkSpec& spec) {
    if (spec.latency.hi < spec.latency.lo || spec.latency.lo < 0)
        throw std::invalid_argument("bad latency range on " + spec.a + "<->" + spec.b);
    auto outs = spec.outages;
    std::sort(outs.begin(), outs.end(), [](auto& x, auto& y) { return x.down < y.down; });
    for (std::size_t i = 0; i < outs.size(); ++i) {
        if (outs[i].up <= outs[i].down) throw std::invalid_argument("empty outage interval");
        if (i > 0 && outs[i].down < outs[i - 1].up) throw std::invalid_argument("overlapping outages");
    }
    LinkSpec s = spec;
    s.outages = outs;
    links_.insert_or_assign(key(spec.a, spec.b),
                            Link{s, Rng(derive_seed(seed_, "link:" + key(spec.a, spec.b).first + "|" +
                                                                 key(spec.a, spec.b).second)),
                                 {}});
}

void Network::attach(const NodeId& node, Handler h) {
    handlers_[node] = std::move(h);
}

void Network::detach(const NodeId& node) {
    handlers_.erase(node);
}

Network::Link* Network::find(const NodeId& a, const NodeId& b) {
    auto it = links_.find(key(a, b));
    return it == links_.end() ? nullptr : &it->second;
}

const Network::Link* Network::find(const NodeId& a, const NodeId& b) const {
    auto it = links_.find(key(a, b));
    return it == links_.end() ? nullptr : &it->second;
}

bool Network::has_link(const NodeId& a, const NodeId& b) const {
    return find(a, b) != nullptr;
}

bool Network::link_up(const NodeId& a, const NodeId& b, double t) const {
    const auto* l = find(a, b);
    if (!l) return false;
    for (const auto& o : l->spec.outages)
        if (t >= o.down && t < o.up) return false;
    return true;
}

std::optional<double> Network::transmit(Link& l, const NodeId& from, const NodeId& to, const Bytes& frame,
                                        const std::string& label, bool dup) {
    const double now = ctx_.now();
    double lat = l.spec.latency.lo;
    if (l.spec.latency.hi > l.spec.latency.lo) lat = l.rng.uniform(l.spec.latency.lo, l.spec.latency.hi);
    auto& last = l.last_delivery[{from, to}];
    double at = std::max(now + lat, last);

    WireRecord rec;
    rec.id = log_.size();
    rec.from = from;
    rec.to = to;
    rec.sent = now;
    rec.label = label;
    rec.duplicate = dup;
    if (keep_bytes_) rec.bytes = frame;

    if (!link_up(from, to, now) || !link_up(from, to, at)) {
        log_.push_back(std::move(rec));
        return std::nullopt;
    }
    last = at;
    rec.delivered = at;
    log_.push_back(std::move(rec));
    ctx_.post_after(at - now, [this, from, to, frame] {
        auto it = handlers_.find(to);
        if (it != handlers_.end()) it->second(from, frame);
    });
    return at;
}

std::optional<double> Network::send(const NodeId& from, const NodeId& to, Bytes frame) {
    auto* l = find(from, to);
    if (!l) throw std::invalid_argument("no link " + from + "<->" + to);
    std::string label = classify_ ? classify_(frame) : std::string{};
    auto at = transmit(*l, from, to, frame, label, false);
    if (at && dup_labels_.count(label)) transmit(*l, from, to, frame, label, true);
    return at;
}

Json to_json(const WireRecord& r) {
    Json j{{"id", r.id}, {"from", r.from}, {"to", r.to}, {"sent", round_time(r.sent)}, {"label", r.label}};
    if (r.delivered)
        j["delivered"] = round_time(*r.delivered);
    else
        j["dropped"] = true;
    if (r.duplicate) j["duplicate"] = true;
    return j;
}

}  // namespace constellation::sim
