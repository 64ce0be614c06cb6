#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "parsim/inbox.hpp"
#include "parsim/kernel.hpp"

namespace parsim {

// One directed cut channel between two LPs. The lookahead equals the delay
// of the cut link; zero lookahead is rejected at partition build time.
struct ProxyLink {
    int id = 0;
    int src_lp = 0;
    int dst_lp = 0;
    SimTime lookahead;
};

struct LpRunStats {
    std::uint64_t events_processed = 0;
    std::uint64_t messages_sent = 0;
    std::uint64_t null_sent = 0;
    std::uint64_t null_received = 0;
    std::uint64_t events_sent = 0;
    std::uint64_t events_received = 0;
    SimTime final_clock;
    double wall_seconds = 0;
};

// Conservative (Chandy–Misra–Bryant) execution of one LP: process events
// strictly below the safe horizon, announce earliest-output-time promises as
// null messages whenever they advance, and terminate through a coordinator
// run by LP 0 once every LP is idle and the global sent/received event
// counts have stabilized.
class LpRuntime {
public:
    LpRuntime(Kernel& kernel, EnvelopeInbox* inbox, int my_lp, int n_lps,
              std::vector<ProxyLink> in_links, std::vector<ProxyLink> out_links);

    LpRunStats run(SimTime t_end);

    // Safe processing horizon: minimum earliest-input-time over all input
    // proxy links; unbounded when the LP has no inputs.
    SimTime safe_time() const;
    // Lower bound on this LP's next output timestamp, before lookahead:
    // min(local FES head, min input EIT).
    SimTime eot_lower_bound() const;
    // Current EOT promise for one output link.
    SimTime eot(int out_index) const;

    std::uint64_t null_sent() const { return null_sent_; }

private:
    void on_proxy_event(int proxy_link, const Event& e);
    void handle(const TaggedEnvelope& te);
    void update_eots(bool force);
    void coordinator_poll();
    bool idle(SimTime t_end) const;
    void send_ctrl(int dst, CtrlKind kind, std::uint64_t round, bool idle_flag);

    Kernel& kernel_;
    EnvelopeInbox* inbox_;
    int my_lp_;
    int n_lps_;
    std::vector<ProxyLink> in_links_;
    std::vector<ProxyLink> out_links_;
    std::unordered_map<int, std::size_t> in_index_;  // link id -> in_links_ index
    std::vector<SimTime> eit_;       // per input link
    std::vector<SimTime> eot_sent_;  // per output link, last announced
    SimTime t_end_;

    std::uint64_t null_sent_ = 0, null_recv_ = 0;
    std::uint64_t events_sent_ = 0, events_recv_ = 0;
    std::uint64_t processed_since_update_ = 0;

    // termination coordination
    bool stop_ = false;
    bool idle_notified_ = false;
    bool collecting_ = false;
    bool poke_ = true;
    std::uint64_t round_ = 0;
    int acks_ = 0;
    bool round_all_idle_ = false;
    std::uint64_t round_sent_ = 0, round_recv_ = 0;
    bool have_last_totals_ = false;
    std::uint64_t last_sent_ = 0, last_recv_ = 0;
};

}  // namespace parsim
