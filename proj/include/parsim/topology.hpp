#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "parsim/scenario.hpp"
#include "parsim/time.hpp"

namespace parsim {

// Subnet classification of a link/interface: the LAN index, or backbone.
constexpr int kBackboneSubnet = -1;

struct TopoNode {
    std::string path;
    bool is_host = false;
    int group = 0;  // LAN index, or kBackboneGroup for backbone routers
};

constexpr int kBackboneGroup = -1;

struct TopoLink {
    int a = 0, b = 0;  // node indices
    SimTime delay;
    std::uint64_t rate_bps = 0;
    int subnet = 0;  // LAN index or kBackboneSubnet
};

struct TopoInterface {
    int node = 0;
    int peer_node = 0;
    int link = 0;
    std::string name;       // eth0, eth1, ... in peer-path order
    std::string path;       // <node path>.<name>
    std::string peer_path;  // interface path of the far end
    int subnet = 0;
};

// Full static module graph: backbone routers plus one campus tree per
// backbone router. Node order is path order, which makes node indices agree
// with event order keys.
struct Topology {
    std::vector<TopoNode> nodes;
    std::vector<TopoLink> links;
    std::vector<TopoInterface> interfaces;          // grouped by node
    std::vector<std::vector<int>> node_interfaces;  // node -> interface indices
    std::vector<std::vector<std::pair<int, int>>> adj;  // node -> sorted (peer, link)

    int node_index(const std::string& path) const;
    std::vector<std::string> paths() const;
};

// Builds the benchmark topology: n_lans backbone routers (first n_lans nodes
// of the adjacency) with one 70-node campus tree each: 1 root + 3 mid +
// 9 leaf routers, 6 hosts per leaf and 3 hosts at the root (57 hosts).
Topology generate_topology(const Scenario& s);

// Closed forms used by tests and reporting.
inline int expected_node_count(int n_lans) { return n_lans + 70 * n_lans; }
inline int expected_link_count(int n_lans, int backbone_edges_used) {
    return 70 * n_lans + backbone_edges_used;  // 69 tree links + 1 gateway per LAN
}

}  // namespace parsim
