#include "parsim/envelope.hpp"

#include <stdexcept>

namespace parsim {

Bytes WireEnvelope::encode() const {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(kind));
    w.i64(ticks);
    w.blob(payload);
    return w.take();
}

WireEnvelope WireEnvelope::decode(const Bytes& frame) {
    ByteReader r(frame);
    WireEnvelope env;
    std::uint8_t k = r.u8();
    if (k > 3) throw std::runtime_error("bad envelope kind byte");
    env.kind = static_cast<Kind>(k);
    env.ticks = r.i64();
    env.payload = r.blob();
    if (!r.done()) throw std::runtime_error("trailing bytes after envelope");
    return env;
}

Bytes EventPayload::encode(std::uint32_t link_id, const Event& e) {
    ByteWriter w;
    w.u32(link_id);
    w.i64(e.time.ticks());
    w.u32(e.target);
    w.u32(e.sender);
    w.u64(e.sender_seq);
    e.payload.encode(w);
    return w.take();
}

EventPayload EventPayload::decode(const Bytes& b) {
    ByteReader r(b);
    EventPayload p;
    p.link_id = r.u32();
    p.event.time = SimTime(r.i64());
    p.event.target = r.u32();
    p.event.sender = r.u32();
    p.event.sender_seq = r.u64();
    p.event.payload = Message::decode(r);
    return p;
}

Bytes CtrlPayload::encode() const {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(kind));
    w.u64(round);
    w.u8(idle);
    w.u64(sent);
    w.u64(received);
    return w.take();
}

CtrlPayload CtrlPayload::decode(const Bytes& b) {
    ByteReader r(b);
    CtrlPayload p;
    p.kind = static_cast<CtrlKind>(r.u8());
    p.round = r.u64();
    p.idle = r.u8();
    p.sent = r.u64();
    p.received = r.u64();
    return p;
}

Bytes TokenPayload::encode() const {
    ByteWriter w;
    w.str(kind_name);
    w.u32(stage);
    w.blob(state);
    return w.take();
}

TokenPayload TokenPayload::decode(const Bytes& b) {
    ByteReader r(b);
    TokenPayload p;
    p.kind_name = r.str();
    p.stage = r.u32();
    p.state = r.blob();
    return p;
}

}  // namespace parsim
