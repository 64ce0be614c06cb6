#include "parsim/tcp_transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>
#include <thread>

namespace parsim {

namespace {

[[noreturn]] void sys_fail(const std::string& what) {
    throw std::runtime_error(what + ": " + std::strerror(errno));
}

// Returns false when the peer is already gone (it reached its stop first);
// messages racing the shutdown broadcast are dropped, not fatal.
bool write_all(int fd, const std::uint8_t* p, std::size_t n) {
    while (n > 0) {
        ssize_t w = ::send(fd, p, n, MSG_NOSIGNAL);
        if (w < 0) {
            if (errno == EINTR) continue;
            if (errno == EPIPE || errno == ECONNRESET) return false;
            sys_fail("tcp write");
        }
        p += w;
        n -= static_cast<std::size_t>(w);
    }
    return true;
}

void read_exact(int fd, std::uint8_t* p, std::size_t n) {
    while (n > 0) {
        ssize_t r = ::read(fd, p, n);
        if (r == 0) throw std::runtime_error("tcp peer closed during handshake");
        if (r < 0) {
            if (errno == EINTR) continue;
            sys_fail("tcp read");
        }
        p += r;
        n -= static_cast<std::size_t>(r);
    }
}

void set_nodelay(int fd) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

sockaddr_in loopback(int port) {
    sockaddr_in a{};
    a.sin_family = AF_INET;
    a.sin_port = htons(static_cast<std::uint16_t>(port));
    a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    return a;
}

}  // namespace

TcpTransport::TcpTransport(int my_lp, int n_lps, int port_base,
                           std::chrono::seconds connect_timeout)
    : lp_(my_lp), n_(n_lps) {
    peer_fd_.assign(static_cast<std::size_t>(n_), -1);
    rbuf_.resize(static_cast<std::size_t>(n_));

    int listen_fd = -1;
    if (lp_ < n_ - 1) {  // someone will connect to us
        listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (listen_fd < 0) sys_fail("socket");
        int one = 1;
        ::setsockopt(listen_fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in addr = loopback(port_base + lp_);
        if (::bind(listen_fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0)
            sys_fail("bind port " + std::to_string(port_base + lp_));
        if (::listen(listen_fd, n_) < 0) sys_fail("listen");
    }

    // Dial every lower rank; their listeners come up as the processes start.
    auto deadline = std::chrono::steady_clock::now() + connect_timeout;
    for (int q = 0; q < lp_; ++q) {
        for (;;) {
            int fd = ::socket(AF_INET, SOCK_STREAM, 0);
            if (fd < 0) sys_fail("socket");
            sockaddr_in addr = loopback(port_base + q);
            if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0) {
                set_nodelay(fd);
                std::uint8_t hello[4] = {
                    static_cast<std::uint8_t>(lp_ >> 24), static_cast<std::uint8_t>(lp_ >> 16),
                    static_cast<std::uint8_t>(lp_ >> 8), static_cast<std::uint8_t>(lp_)};
                write_all(fd, hello, 4);
                peer_fd_[static_cast<std::size_t>(q)] = fd;
                break;
            }
            ::close(fd);
            if (std::chrono::steady_clock::now() > deadline)
                throw std::runtime_error("timed out connecting to lp " + std::to_string(q) +
                                         " on port " + std::to_string(port_base + q));
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
    }

    for (int expected = n_ - 1 - lp_; expected > 0; --expected) {
        pollfd pf{listen_fd, POLLIN, 0};
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0 || ::poll(&pf, 1, static_cast<int>(left.count())) <= 0)
            throw std::runtime_error("timed out accepting peer connections on lp " +
                                     std::to_string(lp_));
        int fd = ::accept(listen_fd, nullptr, nullptr);
        if (fd < 0) sys_fail("accept");
        set_nodelay(fd);
        std::uint8_t hello[4];
        read_exact(fd, hello, 4);
        int rank = (hello[0] << 24) | (hello[1] << 16) | (hello[2] << 8) | hello[3];
        if (rank <= lp_ || rank >= n_ || peer_fd_[static_cast<std::size_t>(rank)] != -1) {
            ::close(fd);
            throw std::runtime_error("unexpected hello rank " + std::to_string(rank));
        }
        peer_fd_[static_cast<std::size_t>(rank)] = fd;
    }
    if (listen_fd >= 0) ::close(listen_fd);
}

TcpTransport::~TcpTransport() {
    for (int fd : peer_fd_)
        if (fd >= 0) ::close(fd);
}

void TcpTransport::send(int dst_lp, Bytes frame) {
    int fd = peer_fd_.at(static_cast<std::size_t>(dst_lp));
    if (fd < 0) throw std::logic_error("no connection to lp " + std::to_string(dst_lp));
    std::uint8_t len[4] = {static_cast<std::uint8_t>(frame.size() >> 24),
                           static_cast<std::uint8_t>(frame.size() >> 16),
                           static_cast<std::uint8_t>(frame.size() >> 8),
                           static_cast<std::uint8_t>(frame.size())};
    if (!write_all(fd, len, 4)) {
        ::close(fd);
        peer_fd_[static_cast<std::size_t>(dst_lp)] = -1;
        return;
    }
    write_all(fd, frame.data(), frame.size());
}

void TcpTransport::pump(int timeout_ms) {
    std::vector<pollfd> pfds;
    std::vector<int> ranks;
    for (int r = 0; r < n_; ++r) {
        int fd = peer_fd_[static_cast<std::size_t>(r)];
        if (fd < 0) continue;
        pfds.push_back(pollfd{fd, POLLIN, 0});
        ranks.push_back(r);
    }
    if (pfds.empty()) return;
    int rc = ::poll(pfds.data(), pfds.size(), timeout_ms);
    if (rc < 0) {
        if (errno == EINTR) return;
        sys_fail("poll");
    }
    if (rc == 0) return;
    for (std::size_t i = 0; i < pfds.size(); ++i) {
        if (!(pfds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
        int rank = ranks[i];
        Bytes& buf = rbuf_[static_cast<std::size_t>(rank)];
        std::uint8_t chunk[65536];
        ssize_t r = ::read(pfds[i].fd, chunk, sizeof chunk);
        if (r < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            sys_fail("tcp read from lp " + std::to_string(rank));
        }
        if (r == 0) {
            // Peer finished and closed; anything unread is already buffered.
            ::close(pfds[i].fd);
            peer_fd_[static_cast<std::size_t>(rank)] = -1;
            continue;
        }
        buf.insert(buf.end(), chunk, chunk + r);
        while (buf.size() >= 4) {
            std::size_t len = (static_cast<std::size_t>(buf[0]) << 24) |
                              (static_cast<std::size_t>(buf[1]) << 16) |
                              (static_cast<std::size_t>(buf[2]) << 8) | buf[3];
            if (buf.size() < 4 + len) break;
            ready_.emplace_back(rank, Bytes(buf.begin() + 4, buf.begin() + 4 + static_cast<long>(len)));
            buf.erase(buf.begin(), buf.begin() + 4 + static_cast<long>(len));
        }
    }
}

std::pair<int, Bytes> TcpTransport::recv(std::chrono::milliseconds watchdog) {
    auto deadline = std::chrono::steady_clock::now() + watchdog;
    while (ready_.empty()) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0)
            throw WatchdogExpired("no message within watchdog on lp " + std::to_string(lp_));
        pump(static_cast<int>(std::min<long long>(left.count(), 1000)));
    }
    auto out = std::move(ready_.front());
    ready_.pop_front();
    return out;
}

std::optional<std::pair<int, Bytes>> TcpTransport::try_recv() {
    if (ready_.empty()) pump(0);
    if (ready_.empty()) return std::nullopt;
    auto out = std::move(ready_.front());
    ready_.pop_front();
    return out;
}

}  // namespace parsim
