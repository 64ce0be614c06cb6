#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "parsim/dmsi.hpp"
#include "parsim/kernel.hpp"
#include "parsim/rng.hpp"
#include "parsim/topology.hpp"

namespace parsim {

// MAC auto-assignment out of the shared DMSI counter: locally administered
// prefix 0A:AA:00, 24-bit counter starting at 1.
constexpr std::uint64_t kMacPrefix = 0x0AAA00000000ULL;
constexpr std::uint64_t kMacCounterMax = 0xFFFFFF;

// Address plan: LAN j gets 10.j.0.0/16, the backbone gets 10.200.0.0/16;
// interfaces take .0.1, .0.2, ... in interface-path order within a subnet.
constexpr int kBackboneSubnetNumber = 200;

std::uint32_t subnet_base(int subnet);  // subnet = LAN index or kBackboneSubnet
MacAddr auto_assign_mac(DmsiState& token);

struct Route {
    std::uint32_t base = 0;
    int prefix_len = 0;
    int out_interface = 0;       // index into the node's interface list
    std::string next_hop_path;   // neighbor node, for dumps and tests
};

class RoutingTable {
public:
    void add(const Route& r);
    const Route* lookup(Ipv4Addr dst) const;
    // Deterministic text form, one line per route, sorted.
    std::vector<std::string> dump() const;
    std::size_t size() const { return host_routes_.size() + prefix_routes_.size(); }

private:
    std::unordered_map<std::uint32_t, Route> host_routes_;  // /32 fast path
    std::vector<Route> prefix_routes_;                      // prefix desc, base asc
};

// Node-local UDP socket id allocation: locally unique, monotone, no global
// counter anywhere.
class UdpLayer {
public:
    std::uint32_t bind();
    void set_next_socket_id(std::uint32_t v) { next_id_ = v; }  // test harness hook
    bool is_bound(std::uint32_t id) const;
    std::size_t socket_count() const { return bound_.size(); }

private:
    std::uint32_t next_id_ = 0;
    std::vector<std::uint32_t> bound_;
};

// Target tables a host app draws from. Addresses resolve at init time; the
// app never touches remote state afterwards.
struct TrafficTargets {
    std::vector<Ipv4Addr> local_hosts;   // same LAN, path order, self excluded
    std::vector<Ipv4Addr> remote_hosts;  // all hosts of other LANs, path order
};

struct AppDraw {
    SimTime delay;
    Ipv4Addr target;
    std::uint64_t size_bytes = 0;
    bool local = false;
};

// One traffic step: exponential inter-arrival, locality coin, uniform
// target, exponential size (ceil, 1 B floor). Single-host LANs fall back to
// a remote target; a single-LAN scenario falls back to local.
std::optional<AppDraw> app_step(RngStream& rng, const TrafficTargets& targets, double p_local,
                                SimTime mean_interarrival, double mean_size_bytes);

struct HostStats {
    std::uint64_t sent = 0;
    std::uint64_t received = 0;
    std::uint64_t delay_sum_ticks = 0;
};

// One network node (host or router) as a single simulation module. The
// Ethernet interfaces, IPv4 forwarding, UDP layer, and the traffic app are
// plain members; only node-to-node traffic becomes events.
class NetNode : public SimModule {
public:
    struct Interface {
        std::string name;
        std::string full_path;
        std::string peer_path;
        int peer_node = -1;
        int subnet = 0;
        int channel = -1;  // kernel channel for sending, -1 = dangling gate
        MacAddr mac;
        MacAddr peer_mac;
        Ipv4Addr addr;
        int prefix_len = 0;
        bool connected = false;
        bool connection_checked = false;
    };

    NetNode(const Topology* topo, int node_index, const Scenario* scenario);

    int num_init_stages() const override { return 4; }
    void init(int stage) override;
    void handle(const Event& e) override;

    // DMSI hook for one interface under the "ethermac" kind.
    void ether_dmsi(int if_idx, int stage, DmsiState& token);

    bool is_host() const { return is_host_; }
    int lan() const { return lan_; }
    std::vector<Interface>& interfaces() { return ifs_; }
    const std::vector<Interface>& interfaces() const { return ifs_; }
    RoutingTable& routes() { return routes_; }
    UdpLayer& udp() { return udp_; }
    const HostStats& stats() const { return stats_; }
    Ipv4Addr primary_addr() const;

    void set_traffic_targets(TrafficTargets t) { targets_ = std::move(t); }

    // Sends an already-headed datagram down the stack (route + frame).
    void send_datagram(const Message& msg);

private:
    void app_start();
    void app_fire();
    int interface_to(int peer_node) const;

    const Topology* topo_;
    const Scenario* scenario_;
    int node_index_;
    bool is_host_;
    int lan_;
    std::vector<Interface> ifs_;
    RoutingTable routes_;
    UdpLayer udp_;
    TrafficTargets targets_;
    RngStream app_rng_;
    AppDraw pending_;
    std::uint32_t app_socket_ = 0;
    bool app_active_ = false;
    std::uint64_t app_seq_ = 0;
    HostStats stats_;
};

// Per-LP IPv4 configurator, registered under the "ipv4cfg" DMSI kind.
// Announces local interfaces in stage 1; in stage 2 every configurator sees
// the full announcement list, derives the (identical) global address map,
// and configures its local nodes: addresses, routing tables, next-hop MACs
// resolved from the announced data, and app target tables.
class Configurator {
public:
    Configurator(const Topology* topo, const Scenario* scenario, std::string path,
                 std::vector<NetNode*> local_nodes);

    const std::string& path() const { return path_; }
    void dmsi(int stage, DmsiState& token);

    // The deterministic address assignment rule, applied to the announced
    // interface list. Exposed for oracle tests.
    static std::map<std::string, Ipv4Addr> assign_addresses(
        const std::vector<std::pair<std::string, int>>& announced_ifaces);

private:
    void announce(DmsiState& token);
    void configure(DmsiState& token);

    const Topology* topo_;
    const Scenario* scenario_;
    std::string path_;
    std::vector<NetNode*> local_nodes_;
};

// Shortest-path routing table for one node: hop-count metric, equal-cost
// ties broken toward the lexicographically smallest first-hop neighbor.
// address_of maps interface path -> address.
RoutingTable build_routes(const Topology& topo, int node_index,
                          const std::map<std::string, Ipv4Addr>& address_of);

}  // namespace parsim
