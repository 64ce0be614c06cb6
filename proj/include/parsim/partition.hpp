#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "parsim/dmsi.hpp"
#include "parsim/kernel.hpp"
#include "parsim/lp_runtime.hpp"
#include "parsim/netstack.hpp"
#include "parsim/topology.hpp"

namespace parsim {

// Assigns module groups to LPs. Groups are the LANs plus the backbone; LANs
// are never split.
struct PartitionMapping {
    int n_lps = 1;
    std::vector<int> group_to_lp;  // index 0..n_lans-1 = LANs, index n_lans = backbone

    int lp_of_group(int group) const {
        if (group == kBackboneGroup) return group_to_lp.back();
        return group_to_lp.at(static_cast<std::size_t>(group));
    }
};

// n_lps == n_lans+1: backbone alone, one LAN per LP. Otherwise LANs go
// round-robin and the backbone joins the last LP.
PartitionMapping assign_partitions(int n_lans, int n_lps);

// Everything one LP needs to run its share of the scenario.
struct LpBuild {
    std::unique_ptr<Kernel> kernel;
    DmsiRegistry registry;
    std::unique_ptr<Configurator> configurator;
    std::vector<NetNode*> local_nodes;  // owned by the kernel, path order
    std::vector<ProxyLink> in_links;
    std::vector<ProxyLink> out_links;
};

// Instantiates the modules of one LP, wires intra-LP channels, and replaces
// each cut channel with a proxy link. Proxy link ids are enumerated in link
// order, identically on every LP. Cut links with zero delay are rejected.
LpBuild build_partition_lp(const Topology& topo, const Scenario& scenario,
                           const PartitionMapping& mapping, int lp);

// Minimum delay over all a->b cut links; nullopt when none exists.
std::optional<SimTime> compute_lookahead(const Topology& topo, const PartitionMapping& mapping,
                                         int a, int b);

constexpr int kNumInitStages = 4;

}  // namespace parsim
