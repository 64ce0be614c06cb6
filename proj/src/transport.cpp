#include "parsim/transport.hpp"

namespace parsim {

InProcHub::InProcHub(int n_lps) : n_(n_lps) {
    inboxes_.reserve(static_cast<std::size_t>(n_lps));
    endpoints_.resize(static_cast<std::size_t>(n_lps));
    for (int i = 0; i < n_lps; ++i) {
        inboxes_.push_back(std::make_unique<Inbox>());
        endpoints_[static_cast<std::size_t>(i)].hub_ = this;
        endpoints_[static_cast<std::size_t>(i)].lp_ = i;
    }
}

void InProcHub::Endpoint::send(int dst_lp, Bytes frame) {
    if (dst_lp < 0 || dst_lp >= hub_->n_) throw std::logic_error("send to unknown LP");
    Inbox& box = *hub_->inboxes_[static_cast<std::size_t>(dst_lp)];
    {
        std::lock_guard<std::mutex> lock(box.mu);
        box.q.emplace_back(lp_, std::move(frame));
    }
    box.cv.notify_one();
}

std::pair<int, Bytes> InProcHub::Endpoint::recv(std::chrono::milliseconds watchdog) {
    Inbox& box = *hub_->inboxes_[static_cast<std::size_t>(lp_)];
    std::unique_lock<std::mutex> lock(box.mu);
    if (!box.cv.wait_for(lock, watchdog, [&] { return !box.q.empty(); }))
        throw WatchdogExpired("LP " + std::to_string(lp_) +
                              " timed out waiting for transport input");
    auto item = std::move(box.q.front());
    box.q.pop_front();
    return item;
}

std::optional<std::pair<int, Bytes>> InProcHub::Endpoint::try_recv() {
    Inbox& box = *hub_->inboxes_[static_cast<std::size_t>(lp_)];
    std::lock_guard<std::mutex> lock(box.mu);
    if (box.q.empty()) return std::nullopt;
    auto item = std::move(box.q.front());
    box.q.pop_front();
    return item;
}

}  // namespace parsim
