#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "parsim/bytes.hpp"

namespace parsim {

struct WatchdogExpired : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Point-to-point frame delivery between LPs. Implementations must deliver
// frames per (src, dst) pair in FIFO order.
class Transport {
public:
    virtual ~Transport() = default;

    virtual int my_lp() const = 0;
    virtual int n_lps() const = 0;

    virtual void send(int dst_lp, Bytes frame) = 0;
    // Blocks until a frame arrives; throws WatchdogExpired on timeout.
    virtual std::pair<int, Bytes> recv(std::chrono::milliseconds watchdog) = 0;
    virtual std::optional<std::pair<int, Bytes>> try_recv() = 0;
};

// Shared-memory transport: one endpoint per LP thread, one inbox per LP.
class InProcHub {
public:
    explicit InProcHub(int n_lps);

    class Endpoint : public Transport {
    public:
        int my_lp() const override { return lp_; }
        int n_lps() const override { return hub_->n_; }
        void send(int dst_lp, Bytes frame) override;
        std::pair<int, Bytes> recv(std::chrono::milliseconds watchdog) override;
        std::optional<std::pair<int, Bytes>> try_recv() override;

    private:
        friend class InProcHub;
        InProcHub* hub_ = nullptr;
        int lp_ = 0;
    };

    Endpoint& endpoint(int lp) { return endpoints_[static_cast<std::size_t>(lp)]; }

private:
    struct Inbox {
        std::mutex mu;
        std::condition_variable cv;
        std::deque<std::pair<int, Bytes>> q;
    };

    int n_;
    std::vector<std::unique_ptr<Inbox>> inboxes_;
    std::vector<Endpoint> endpoints_;
};

}  // namespace parsim
