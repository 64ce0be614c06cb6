#include "parsim/lp_runtime.hpp"

#include <chrono>
#include <stdexcept>

namespace parsim {

LpRuntime::LpRuntime(Kernel& kernel, EnvelopeInbox* inbox, int my_lp, int n_lps,
                     std::vector<ProxyLink> in_links, std::vector<ProxyLink> out_links)
    : kernel_(kernel),
      inbox_(inbox),
      my_lp_(my_lp),
      n_lps_(n_lps),
      in_links_(std::move(in_links)),
      out_links_(std::move(out_links)),
      t_end_(SimTime::max()) {
    for (const ProxyLink& l : in_links_) {
        if (l.lookahead <= SimTime::zero())
            throw std::invalid_argument("proxy link " + std::to_string(l.id) +
                                        " has zero lookahead");
        in_index_[l.id] = eit_.size();
        eit_.push_back(SimTime::zero());
    }
    for (const ProxyLink& l : out_links_) {
        if (l.lookahead <= SimTime::zero())
            throw std::invalid_argument("proxy link " + std::to_string(l.id) +
                                        " has zero lookahead");
        eot_sent_.push_back(SimTime::zero());
    }
    kernel_.proxy_sink = [this](int link, const Event& e) { on_proxy_event(link, e); };
}

SimTime LpRuntime::safe_time() const {
    SimTime t = SimTime::max();
    for (SimTime e : eit_) t = std::min(t, e);
    return t;
}

SimTime LpRuntime::eot_lower_bound() const {
    SimTime head = kernel_.has_event() ? kernel_.peek().time : SimTime::max();
    return std::min(head, safe_time());
}

SimTime LpRuntime::eot(int out_index) const {
    return eot_lower_bound().saturating_add(out_links_[static_cast<std::size_t>(out_index)].lookahead);
}

void LpRuntime::on_proxy_event(int link_id, const Event& e) {
    const ProxyLink* link = nullptr;
    std::size_t idx = 0;
    for (; idx < out_links_.size(); ++idx)
        if (out_links_[idx].id == link_id) {
            link = &out_links_[idx];
            break;
        }
    if (!link) throw std::logic_error("event for unknown output proxy link");
    // The promise already made on this link must still cover the event.
    if (e.time < eot_sent_[idx])
        throw std::logic_error("EOT promise violated: event at " + e.time.to_string() +
                               " after announcing " + eot_sent_[idx].to_string());
    WireEnvelope env;
    env.kind = WireEnvelope::Kind::event;
    env.ticks = e.time.ticks();
    env.payload = EventPayload::encode(static_cast<std::uint32_t>(link_id), e);
    inbox_->send(link->dst_lp, env);
    ++events_sent_;
    // Arrivals on one channel are nondecreasing, so the event doubles as an
    // EOT promise; later nulls must never fall below it (the receiver treats
    // a shrinking EIT as fatal).
    eot_sent_[idx] = std::max(eot_sent_[idx], e.time);
}

void LpRuntime::handle(const TaggedEnvelope& te) {
    poke_ = true;
    switch (te.env.kind) {
        case WireEnvelope::Kind::event: {
            EventPayload p = EventPayload::decode(te.env.payload);
            auto it = in_index_.find(static_cast<int>(p.link_id));
            if (it == in_index_.end())
                throw std::logic_error("event on unknown input proxy link");
            SimTime t = p.event.time;
            if (t < eit_[it->second])
                throw std::logic_error("causality violation on link " +
                                       std::to_string(p.link_id) + ": event at " +
                                       t.to_string() + " below EIT " +
                                       eit_[it->second].to_string());
            eit_[it->second] = std::max(eit_[it->second], t);
            kernel_.insert_remote(p.event);
            ++events_recv_;
            idle_notified_ = false;  // new work: the next idle spell is news again
            break;
        }
        case WireEnvelope::Kind::null_msg: {
            ByteReader r(te.env.payload);
            int link_id = static_cast<int>(r.u32());
            auto it = in_index_.find(link_id);
            if (it == in_index_.end())
                throw std::logic_error("null message on unknown input proxy link");
            SimTime t(te.env.ticks);
            if (t < eit_[it->second])
                throw std::logic_error("EIT regression on link " + std::to_string(link_id) +
                                       ": null at " + t.to_string() + " below EIT " +
                                       eit_[it->second].to_string());
            eit_[it->second] = t;
            ++null_recv_;
            break;
        }
        case WireEnvelope::Kind::barrier: {
            CtrlPayload p = CtrlPayload::decode(te.env.payload);
            switch (p.kind) {
                case CtrlKind::term_req:
                    send_ctrl(te.src, CtrlKind::term_ack, p.round, idle(t_end_));
                    break;
                case CtrlKind::term_ack:
                    if (my_lp_ != 0 || !collecting_ || p.round != round_) break;
                    ++acks_;
                    if (!p.idle) round_all_idle_ = false;
                    round_sent_ += p.sent;
                    round_recv_ += p.received;
                    break;
                case CtrlKind::stop:
                    stop_ = true;
                    break;
                default:
                    throw std::logic_error("unexpected barrier control during run phase");
            }
            break;
        }
        case WireEnvelope::Kind::dmsi_token:
            throw std::logic_error("DMSI token received after initialization finished");
    }
}

void LpRuntime::send_ctrl(int dst, CtrlKind kind, std::uint64_t round, bool idle_flag) {
    CtrlPayload p;
    p.kind = kind;
    p.round = round;
    p.idle = idle_flag ? 1 : 0;
    p.sent = events_sent_;
    p.received = events_recv_;
    WireEnvelope env;
    env.kind = WireEnvelope::Kind::barrier;
    env.payload = p.encode();
    inbox_->send(dst, env);
}

bool LpRuntime::idle(SimTime t_end) const {
    return !kernel_.has_event() || kernel_.peek().time > t_end;
}

void LpRuntime::update_eots(bool force) {
    // Eager EOT announcements, lightly batched: a busy LP refreshes its
    // promises every few hundred events, and always right before blocking.
    if (!force && processed_since_update_ < 256) return;
    processed_since_update_ = 0;
    SimTime lb = eot_lower_bound();
    for (std::size_t i = 0; i < out_links_.size(); ++i) {
        SimTime promise = lb.saturating_add(out_links_[i].lookahead);
        if (promise > eot_sent_[i]) {
            eot_sent_[i] = promise;
            WireEnvelope env;
            env.kind = WireEnvelope::Kind::null_msg;
            env.ticks = promise.ticks();
            ByteWriter w;
            w.u32(static_cast<std::uint32_t>(out_links_[i].id));
            env.payload = w.take();
            inbox_->send(out_links_[i].dst_lp, env);
            ++null_sent_;
        }
    }
}

void LpRuntime::coordinator_poll() {
    if (my_lp_ != 0 || stop_) return;
    if (collecting_) {
        if (acks_ < n_lps_ - 1) return;
        collecting_ = false;
        bool all_idle = round_all_idle_ && idle(t_end_);
        std::uint64_t total_sent = round_sent_ + events_sent_;
        std::uint64_t total_recv = round_recv_ + events_recv_;
        if (all_idle && total_sent == total_recv) {
            if (have_last_totals_ && last_sent_ == total_sent && last_recv_ == total_recv) {
                for (int lp = 1; lp < n_lps_; ++lp)
                    send_ctrl(lp, CtrlKind::stop, round_, true);
                stop_ = true;
                return;
            }
            have_last_totals_ = true;
            last_sent_ = total_sent;
            last_recv_ = total_recv;
            poke_ = true;  // fall through: run the confirming round right away
        } else {
            // Some LP is still busy or events are in flight; its idle
            // notification (or any other message) restarts the probing.
            return;
        }
    }
    if (!poke_ || !idle(t_end_)) return;
    poke_ = false;
    ++round_;
    acks_ = 0;
    round_all_idle_ = true;
    round_sent_ = 0;
    round_recv_ = 0;
    collecting_ = true;
    if (n_lps_ == 1) {
        // Degenerate single-LP case: the round completes immediately.
        coordinator_poll();
        return;
    }
    for (int lp = 1; lp < n_lps_; ++lp) send_ctrl(lp, CtrlKind::term_req, round_, true);
}

LpRunStats LpRuntime::run(SimTime t_end) {
    t_end_ = t_end;
    auto wall0 = std::chrono::steady_clock::now();
    std::uint64_t ev0 = kernel_.events_processed();
    std::uint64_t msg0 = kernel_.messages_sent();

    if (!inbox_) {
        // Solo execution: plain sequential run.
        kernel_.run(t_end);
    } else {
        update_eots(true);
        while (!stop_) {
            while (auto te = inbox_->try_recv_any()) {
                handle(*te);
                if (stop_) break;
            }
            if (stop_) break;
            bool worked = false;
            SimTime safe = safe_time();
            while (kernel_.has_event()) {
                const Event& head = kernel_.peek();
                if (head.time > t_end || head.time >= safe) break;
                kernel_.step();
                worked = true;
                ++processed_since_update_;
                update_eots(false);
                if (processed_since_update_ == 0) {
                    // Batch boundary: also service the inbox so peers'
                    // control traffic is answered during long busy bursts.
                    while (auto te = inbox_->try_recv_any()) {
                        handle(*te);
                        if (stop_) break;
                    }
                    if (stop_) break;
                    safe = safe_time();
                }
            }
            if (stop_) break;
            if (worked) idle_notified_ = false;
            update_eots(true);
            coordinator_poll();
            if (stop_) break;
            if (!worked) {
                // Tell the coordinator once per idle spell, so it retries the
                // termination probe even when no event traffic reaches it.
                if (my_lp_ != 0 && idle(t_end) && !idle_notified_) {
                    send_ctrl(0, CtrlKind::term_ack, 0, true);
                    idle_notified_ = true;
                }
                try {
                    handle(inbox_->recv_any());
                } catch (const WatchdogExpired&) {
                    std::string head = kernel_.has_event()
                                           ? kernel_.peek().time.to_string()
                                           : std::string("-");
                    throw WatchdogExpired(
                        "lp " + std::to_string(my_lp_) + " starved: head=" + head +
                        " safe=" + safe_time().to_string() + " sent=" +
                        std::to_string(events_sent_) + " recv=" + std::to_string(events_recv_) +
                        " collecting=" + std::to_string(collecting_) +
                        " acks=" + std::to_string(acks_) + " round=" + std::to_string(round_));
                }
            }
        }
    }

    LpRunStats s;
    s.events_processed = kernel_.events_processed() - ev0;
    s.messages_sent = kernel_.messages_sent() - msg0;
    s.null_sent = null_sent_;
    s.null_received = null_recv_;
    s.events_sent = events_sent_;
    s.events_received = events_recv_;
    s.final_clock = kernel_.now();
    s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    return s;
}

}  // namespace parsim
