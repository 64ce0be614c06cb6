#pragma once

#include <chrono>
#include <deque>
#include <utility>
#include <vector>

#include "parsim/transport.hpp"

namespace parsim {

// Loopback TCP mesh: rank r listens on port_base + r, connects to every
// lower rank, and accepts from every higher rank. Each connection starts
// with a 4-byte big-endian hello carrying the connector's rank; frames are
// 4-byte big-endian length-prefixed.
class TcpTransport : public Transport {
public:
    TcpTransport(int my_lp, int n_lps, int port_base,
                 std::chrono::seconds connect_timeout = std::chrono::seconds(30));
    ~TcpTransport() override;

    TcpTransport(const TcpTransport&) = delete;
    TcpTransport& operator=(const TcpTransport&) = delete;

    int my_lp() const override { return lp_; }
    int n_lps() const override { return n_; }

    void send(int dst_lp, Bytes frame) override;
    std::pair<int, Bytes> recv(std::chrono::milliseconds watchdog) override;
    std::optional<std::pair<int, Bytes>> try_recv() override;

private:
    void pump(int timeout_ms);  // poll + drain readable sockets into ready_

    int lp_;
    int n_;
    std::vector<int> peer_fd_;   // index = peer rank, -1 for self
    std::vector<Bytes> rbuf_;    // per-peer partial frame buffer
    std::deque<std::pair<int, Bytes>> ready_;
};

}  // namespace parsim
