#include "constellation/aip/transport.hpp"

#include "constellation/error.hpp"
#include "constellation/util/log.hpp"

namespace constellation::aip {

bool SimTransport::probe(const NodeId& peer) {
    return net_.has_link(self_, peer) && net_.link_up(self_, peer, net_.now());
}

Endpoint::Endpoint(Transport& t) : t_(t) {
    t_.on_frame([this](const NodeId& from, const Bytes& frame) { receive(from, frame); });
}

AipMessage Endpoint::send(const NodeId& to, Body b, std::optional<std::string> session) {
    auto seq = seq_.next_out(session.value_or(""));
    auto m = make_message(std::move(b), t_.self(), std::move(session), seq);
    t_.send(to, encode(m));
    return m;
}

void Endpoint::receive(const NodeId& from, const Bytes& frame) {
    AipMessage m;
    try {
        m = decode(frame);
    } catch (const Error& e) {
        ++schema_errors_;
        log::warn("aip", t_.self() + ": rejected frame from " + from + ": " + e.what());
        if (peek_type(frame) != "ERROR")
            send(from, body::Error{e.what(), Json{{"code", to_string(e.code())}, {"type", peek_type(frame)}}});
        return;
    }
    bool fresh = seq_.accept(m.session_id.value_or(""), m.sender, m.seq);
    if (!fresh) ++duplicates_;
    if (handler_) handler_(from, m, !fresh);
}

}  // namespace constellation::aip
