#pragma once

#include <cstdint>

#include "parsim/bytes.hpp"
#include "parsim/event.hpp"
#include "parsim/time.hpp"

namespace parsim {

// Everything crossing an LP boundary travels in one of these. Encoding is
// length-prefixed binary: 1-byte kind, 8-byte big-endian ticks, 4-byte
// payload length, payload bytes — bit-exact across platforms.
struct WireEnvelope {
    enum class Kind : std::uint8_t {
        event = 0,
        null_msg = 1,
        dmsi_token = 2,
        barrier = 3,
    };

    Kind kind = Kind::null_msg;
    std::int64_t ticks = 0;
    Bytes payload;

    Bytes encode() const;
    static WireEnvelope decode(const Bytes& frame);

    bool operator==(const WireEnvelope&) const = default;
};

// Payload helpers ----------------------------------------------------------

struct EventPayload {
    std::uint32_t link_id = 0;
    Event event;

    static Bytes encode(std::uint32_t link_id, const Event& e);
    static EventPayload decode(const Bytes& b);
};

// Control traffic multiplexed over the barrier envelope kind.
enum class CtrlKind : std::uint8_t {
    barrier_arrive = 0,
    barrier_release = 1,
    term_req = 2,
    term_ack = 3,
    stop = 4,
};

struct CtrlPayload {
    CtrlKind kind = CtrlKind::barrier_arrive;
    std::uint64_t round = 0;
    std::uint8_t idle = 0;
    std::uint64_t sent = 0;
    std::uint64_t received = 0;

    Bytes encode() const;
    static CtrlPayload decode(const Bytes& b);
};

struct TokenPayload {
    std::string kind_name;
    std::uint32_t stage = 0;
    Bytes state;

    Bytes encode() const;
    static TokenPayload decode(const Bytes& b);
};

}  // namespace parsim
