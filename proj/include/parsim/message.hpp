#pragma once

#include <cstdint>
#include <string>

#include "parsim/bytes.hpp"
#include "parsim/time.hpp"

namespace parsim {

enum class MsgKind : std::uint8_t {
    frame = 0,       // link layer, carries MAC src/dst
    packet = 1,      // network layer, carries IPv4 src/dst
    datagram = 2,    // transport layer, adds UDP ports
    app_payload = 3, // application data, adds sequence number + send time
    control = 4,     // timers and other module-internal signals
};

const char* msg_kind_name(MsgKind k);

struct MacAddr {
    std::uint64_t value = 0;  // low 48 bits
    std::string to_string() const;
    auto operator<=>(const MacAddr&) const = default;
};

struct Ipv4Addr {
    std::uint32_t value = 0;
    std::string to_string() const;
    auto operator<=>(const Ipv4Addr&) const = default;
};

// One message type covers all layers; header fields are meaningful only for
// the kinds that require them (invariant checked by validate()). Stacked
// headers are modeled by keeping the outer kind while the inner fields stay
// filled in, which is enough for a fixed Ethernet/IPv4/UDP stack.
struct Message {
    MsgKind kind = MsgKind::control;
    std::uint64_t byte_length = 0;

    MacAddr mac_src, mac_dst;           // frame
    Ipv4Addr ip_src, ip_dst;            // packet and below
    std::uint16_t udp_src_port = 0;     // datagram and below
    std::uint16_t udp_dst_port = 0;
    std::uint64_t app_seq = 0;          // app_payload
    SimTime app_send_time;              // app_payload, for delay statistics

    void encode(ByteWriter& w) const;
    static Message decode(ByteReader& r);

    bool operator==(const Message&) const = default;
};

}  // namespace parsim
