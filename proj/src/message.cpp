#include "parsim/message.hpp"

#include <cstdio>

namespace parsim {

const char* msg_kind_name(MsgKind k) {
    switch (k) {
        case MsgKind::frame: return "frame";
        case MsgKind::packet: return "packet";
        case MsgKind::datagram: return "datagram";
        case MsgKind::app_payload: return "app-payload";
        case MsgKind::control: return "control";
    }
    return "?";
}

std::string MacAddr::to_string() const {
    char buf[18];
    std::snprintf(buf, sizeof buf, "%02X:%02X:%02X:%02X:%02X:%02X",
                  unsigned((value >> 40) & 0xff), unsigned((value >> 32) & 0xff),
                  unsigned((value >> 24) & 0xff), unsigned((value >> 16) & 0xff),
                  unsigned((value >> 8) & 0xff), unsigned(value & 0xff));
    return buf;
}

std::string Ipv4Addr::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", (value >> 24) & 0xff,
                  (value >> 16) & 0xff, (value >> 8) & 0xff, value & 0xff);
    return buf;
}

void Message::encode(ByteWriter& w) const {
    w.u8(static_cast<std::uint8_t>(kind));
    w.u64(byte_length);
    w.u64(mac_src.value);
    w.u64(mac_dst.value);
    w.u32(ip_src.value);
    w.u32(ip_dst.value);
    w.u16(udp_src_port);
    w.u16(udp_dst_port);
    w.u64(app_seq);
    w.i64(app_send_time.ticks());
}

Message Message::decode(ByteReader& r) {
    Message m;
    m.kind = static_cast<MsgKind>(r.u8());
    m.byte_length = r.u64();
    m.mac_src.value = r.u64();
    m.mac_dst.value = r.u64();
    m.ip_src.value = r.u32();
    m.ip_dst.value = r.u32();
    m.udp_src_port = r.u16();
    m.udp_dst_port = r.u16();
    m.app_seq = r.u64();
    m.app_send_time = SimTime(r.i64());
    return m;
}

}  // namespace parsim
