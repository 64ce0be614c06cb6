#include "parsim/kernel.hpp"

#include <chrono>
#include <stdexcept>

namespace parsim {

SimTime transmission_time(std::uint64_t byte_length, std::uint64_t datarate_bps) {
    if (datarate_bps == 0) return SimTime::zero();
    // ceil(bits * 1e12 / rate), computed in 128 bits so large frames cannot
    // overflow silently.
    unsigned __int128 bits = static_cast<unsigned __int128>(byte_length) * 8;
    unsigned __int128 num = bits * 1'000'000'000'000ULL + (datarate_bps - 1);
    unsigned __int128 ticks = num / datarate_bps;
    if (ticks > static_cast<unsigned __int128>(std::numeric_limits<std::int64_t>::max()))
        throw std::overflow_error("transmission time overflows SimTime");
    return SimTime(static_cast<std::int64_t>(ticks));
}

SimModule& Kernel::add_module(std::unique_ptr<SimModule> m, const std::string& path) {
    ModuleId id = paths_.id_of(path);
    if (by_id_.size() < paths_.size()) by_id_.resize(paths_.size(), nullptr);
    if (by_id_[id] != nullptr) throw std::logic_error("duplicate module at " + path);
    m->kernel_ = this;
    m->id_ = id;
    m->path_ = path;
    SimModule& ref = *m;
    by_id_[id] = m.get();
    owned_.push_back(std::move(m));
    // keep local_order_ sorted by id (= path order)
    auto it = local_order_.begin();
    while (it != local_order_.end() && (*it)->id() < id) ++it;
    local_order_.insert(it, &ref);
    return ref;
}

SimModule* Kernel::find_module(ModuleId id) const {
    if (id >= by_id_.size()) return nullptr;
    return by_id_[id];
}

int Kernel::add_channel(const std::string& src_path, const std::string& dst_path,
                        SimTime delay, std::uint64_t datarate_bps) {
    if (delay < SimTime::zero()) throw std::invalid_argument("negative channel delay");
    Channel c;
    c.delay = delay;
    c.datarate_bps = datarate_bps;
    c.src = paths_.id_of(src_path);
    c.dst = paths_.id_of(dst_path);
    channels_.push_back(c);
    return static_cast<int>(channels_.size() - 1);
}

int Kernel::add_proxy_channel(const std::string& src_path, const std::string& dst_path,
                              int proxy_link, SimTime delay, std::uint64_t datarate_bps) {
    if (delay < SimTime::zero()) throw std::invalid_argument("negative channel delay");
    Channel c;
    c.delay = delay;
    c.datarate_bps = datarate_bps;
    c.src = paths_.id_of(src_path);
    c.dst = paths_.id_of(dst_path);
    c.proxy_link = proxy_link;
    channels_.push_back(c);
    return static_cast<int>(channels_.size() - 1);
}

Event Kernel::make_event(SimModule& sender, ModuleId target, SimTime t, const Message& msg) {
    Event e;
    e.time = t;
    e.target = target;
    e.sender = sender.id();
    e.sender_seq = sender.next_seq_++;
    e.payload = msg;
    return e;
}

SimTime Kernel::send_via_gate(SimModule& sender, int channel_idx, const Message& msg) {
    Channel& ch = channels_.at(static_cast<std::size_t>(channel_idx));
    if (ch.src != sender.id())
        throw std::logic_error("module " + sender.path() + " does not own this gate");
    SimTime start = std::max(clock_, ch.busy_until);
    SimTime tx = transmission_time(msg.byte_length, ch.datarate_bps);
    SimTime arrival = start + tx + ch.delay;
    ch.busy_until = start + tx;
    ++messages_sent_;
    Event e = make_event(sender, ch.dst, arrival, msg);
    if (ch.proxy_link >= 0) {
        if (!proxy_sink) throw std::logic_error("proxy channel without a proxy sink");
        proxy_sink(ch.proxy_link, e);
    } else {
        fes_.push(e);
    }
    return arrival;
}

void Kernel::schedule_self(SimModule& m, SimTime t, const Message& msg) {
    if (t < clock_) throw std::logic_error("self event scheduled in the past");
    ++messages_sent_;
    fes_.push(make_event(m, m.id(), t, msg));
}

void Kernel::insert_remote(const Event& e) {
    if (e.target >= by_id_.size() || by_id_[e.target] == nullptr)
        throw std::logic_error("remote event for module not on this LP: " +
                               paths_.path_of(e.target));
    fes_.push(e);
}

const Event& Kernel::peek() const {
    if (fes_.empty()) throw std::logic_error("peek on empty future event set");
    return fes_.top();
}

Event Kernel::pop_min() {
    if (fes_.empty()) throw std::logic_error("pop on empty future event set");
    Event e = fes_.top();
    fes_.pop();
    return e;
}

void Kernel::write_trace_line(const Event& e) {
    if (!trace_) return;
    *trace_ << e.time.ticks() << ' ' << paths_.path_of(e.target) << ' '
            << msg_kind_name(e.payload.kind) << ' ' << paths_.path_of(e.sender) << ' '
            << e.sender_seq << '\n';
}

void Kernel::step() {
    Event e = pop_min();
    if (e.time < clock_)
        throw std::logic_error("causality violation: event at " + e.time.to_string() +
                               " while clock is " + clock_.to_string());
    clock_ = e.time;
    write_trace_line(e);
    ++events_processed_;
    SimModule* m = by_id_[e.target];
    try {
        m->handle(e);
    } catch (const std::exception& ex) {
        throw std::runtime_error("module " + m->path() + " failed on event at t=" +
                                 e.time.to_string() + ": " + ex.what());
    }
}

RunStats Kernel::run(SimTime t_end) {
    auto t0 = std::chrono::steady_clock::now();
    std::uint64_t ev0 = events_processed_, msg0 = messages_sent_;
    while (!fes_.empty() && fes_.top().time <= t_end) step();
    RunStats s;
    s.events_processed = events_processed_ - ev0;
    s.messages_sent = messages_sent_ - msg0;
    s.final_clock = clock_;
    s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return s;
}

void Kernel::init_all(int num_stages) {
    for (SimModule* m : local_order_)
        if (m->num_init_stages() > num_stages)
            throw std::logic_error("module " + m->path() + " requests init stage beyond " +
                                   std::to_string(num_stages));
    for (int s = 0; s < num_stages; ++s)
        for (SimModule* m : local_order_)
            if (s < m->num_init_stages()) m->init(s);
}

}  // namespace parsim
