#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "constellation/aip/message.hpp"
#include "constellation/aip/session.hpp"
#include "constellation/runtime/context.hpp"
#include "constellation/sim/network.hpp"

namespace constellation::aip {

using NodeId = std::string;

// Moves frames between named nodes.
class Transport {
  public:
    using FrameHandler = std::function<void(const NodeId& from, const Bytes& frame)>;

    virtual ~Transport() = default;
    virtual const NodeId& self() const = 0;
    // Fire and forget. Frames to an unreachable peer are lost.
    virtual void send(const NodeId& to, Bytes frame) = 0;
    virtual void on_frame(FrameHandler h) = 0;
    // One connection attempt. True if the peer is reachable now.
    virtual bool probe(const NodeId& peer) = 0;
};

class SimTransport final : public Transport {
  public:
    SimTransport(sim::Network& net, NodeId self) : net_(net), self_(std::move(self)) {}
    ~SimTransport() override { net_.detach(self_); }

    const NodeId& self() const override { return self_; }
    void send(const NodeId& to, Bytes frame) override { net_.send(self_, to, std::move(frame)); }
    void on_frame(FrameHandler h) override { net_.attach(self_, std::move(h)); }
    bool probe(const NodeId& peer) override;

  private:
    sim::Network& net_;
    NodeId self_;
};

// Typed messaging over a transport: stamps seq numbers, validates incoming
// frames, answers malformed ones with ERROR and flags duplicates.
class Endpoint {
  public:
    using Handler = std::function<void(const NodeId& from, const AipMessage& m, bool duplicate)>;

    explicit Endpoint(Transport& t);

    const NodeId& self() const { return t_.self(); }
    void on_message(Handler h) { handler_ = std::move(h); }
    AipMessage send(const NodeId& to, Body b, std::optional<std::string> session = std::nullopt);
    bool probe(const NodeId& peer) { return t_.probe(peer); }

    std::size_t schema_errors() const { return schema_errors_; }
    std::size_t duplicates() const { return duplicates_; }

  private:
    void receive(const NodeId& from, const Bytes& frame);

    Transport& t_;
    Handler handler_;
    SeqTracker seq_;
    std::size_t schema_errors_ = 0;
    std::size_t duplicates_ = 0;
};

}  // namespace constellation::aip
