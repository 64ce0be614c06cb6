#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <optional>

#include "parsim/envelope.hpp"
#include "parsim/transport.hpp"

namespace parsim {

struct TaggedEnvelope {
    int src = -1;
    WireEnvelope env;
};

// Buffered receive on top of a Transport. Protocol phases overlap at their
// edges (a fast LP's first null can arrive while a slow LP still waits in
// the last init barrier), so out-of-phase envelopes are parked here instead
// of being dropped.
class EnvelopeInbox {
public:
    EnvelopeInbox(Transport& t, std::chrono::milliseconds watchdog)
        : transport_(t), watchdog_(watchdog) {}

    void send(int dst, const WireEnvelope& env) { transport_.send(dst, env.encode()); }

    TaggedEnvelope recv_match(const std::function<bool(const TaggedEnvelope&)>& pred) {
        for (auto it = pending_.begin(); it != pending_.end(); ++it) {
            if (pred(*it)) {
                TaggedEnvelope e = std::move(*it);
                pending_.erase(it);
                return e;
            }
        }
        for (;;) {
            TaggedEnvelope e = recv_raw();
            if (pred(e)) return e;
            pending_.push_back(std::move(e));
        }
    }

    TaggedEnvelope recv_any() {
        if (!pending_.empty()) {
            TaggedEnvelope e = std::move(pending_.front());
            pending_.pop_front();
            return e;
        }
        return recv_raw();
    }

    std::optional<TaggedEnvelope> try_recv_any() {
        if (!pending_.empty()) {
            TaggedEnvelope e = std::move(pending_.front());
            pending_.pop_front();
            return e;
        }
        auto raw = transport_.try_recv();
        if (!raw) return std::nullopt;
        return TaggedEnvelope{raw->first, WireEnvelope::decode(raw->second)};
    }

    Transport& transport() { return transport_; }

private:
    TaggedEnvelope recv_raw() {
        auto [src, frame] = transport_.recv(watchdog_);
        return TaggedEnvelope{src, WireEnvelope::decode(frame)};
    }

    Transport& transport_;
    std::chrono::milliseconds watchdog_;
    std::deque<TaggedEnvelope> pending_;
};

}  // namespace parsim
