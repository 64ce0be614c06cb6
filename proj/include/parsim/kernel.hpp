#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <queue>
#include <string>
#include <vector>

#include "parsim/event.hpp"
#include "parsim/message.hpp"
#include "parsim/time.hpp"

namespace parsim {

class Kernel;

class SimModule {
public:
    virtual ~SimModule() = default;

    virtual int num_init_stages() const { return 1; }
    virtual void init(int stage) { (void)stage; }
    virtual void handle(const Event& e) = 0;

    const std::string& path() const { return path_; }
    ModuleId id() const { return id_; }
    Kernel& kernel() const { return *kernel_; }

private:
    friend class Kernel;
    Kernel* kernel_ = nullptr;
    ModuleId id_ = 0;
    std::string path_;
    std::uint64_t next_seq_ = 0;
};

struct RunStats {
    std::uint64_t events_processed = 0;
    std::uint64_t messages_sent = 0;
    SimTime final_clock;
    double wall_seconds = 0;
};

// Unidirectional channel with delay + datarate. Transmissions on one channel
// serialize: a frame starts no earlier than the previous one finished.
struct Channel {
    SimTime delay;
    std::uint64_t datarate_bps = 0;  // 0 = unlimited
    ModuleId src = 0;
    ModuleId dst = 0;
    int proxy_link = -1;     // >= 0: destination lives on another LP
    SimTime busy_until;
};

// ceil(8 * bytes / rate) in picoseconds; 0 for unlimited rate.
SimTime transmission_time(std::uint64_t byte_length, std::uint64_t datarate_bps);

// Sequential discrete-event core. One instance per LP; instances never share
// mutable state.
class Kernel {
public:
    explicit Kernel(PathTable paths) : paths_(std::move(paths)) {}

    SimModule& add_module(std::unique_ptr<SimModule> m, const std::string& path);
    SimModule* find_module(ModuleId id) const;
    const std::vector<SimModule*>& local_modules() const { return local_order_; }

    int add_channel(const std::string& src_path, const std::string& dst_path,
                    SimTime delay, std::uint64_t datarate_bps);
    int add_proxy_channel(const std::string& src_path, const std::string& dst_path,
                          int proxy_link, SimTime delay, std::uint64_t datarate_bps);
    Channel& channel(int idx) { return channels_[static_cast<std::size_t>(idx)]; }

    // Schedules the arrival event (or hands it to proxy_sink for cross-LP
    // channels); returns the arrival time.
    SimTime send_via_gate(SimModule& sender, int channel_idx, const Message& msg);
    void schedule_self(SimModule& m, SimTime t, const Message& msg);
    void insert_remote(const Event& e);  // arrival from another LP

    bool has_event() const { return !fes_.empty(); }
    const Event& peek() const;
    Event pop_min();
    void step();  // pop + dispatch one event
    RunStats run(SimTime t_end);

    SimTime now() const { return clock_; }
    const PathTable& paths() const { return paths_; }

    // Plain staged init for kernels without a DMSI driver: every module's
    // init(s) runs before any init(s+1), modules visited in path order.
    void init_all(int num_stages);

    void set_trace(std::ostream* os) { trace_ = os; }
    void write_trace_line(const Event& e);

    std::uint64_t events_processed() const { return events_processed_; }
    std::uint64_t messages_sent() const { return messages_sent_; }

    // Set by the LP runtime; receives events whose target lives on another LP.
    std::function<void(int proxy_link, const Event&)> proxy_sink;

private:
    struct KeyGreater {
        bool operator()(const Event& a, const Event& b) const { return b.key() < a.key(); }
    };

    Event make_event(SimModule& sender, ModuleId target, SimTime t, const Message& msg);

    PathTable paths_;
    std::vector<std::unique_ptr<SimModule>> owned_;
    std::vector<SimModule*> by_id_;      // index = ModuleId, nullptr if remote
    std::vector<SimModule*> local_order_;  // local modules in path (= id) order
    std::vector<Channel> channels_;
    std::priority_queue<Event, std::vector<Event>, KeyGreater> fes_;
    SimTime clock_;
    std::ostream* trace_ = nullptr;
    std::uint64_t events_processed_ = 0;
    std::uint64_t messages_sent_ = 0;
};

}  // namespace parsim
