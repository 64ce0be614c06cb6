#include "parsim/partition.hpp"

#include <cstdio>
#include <stdexcept>

namespace parsim {

namespace {

std::string two_digits(int v) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02d", v);
    return buf;
}

}  // namespace

PartitionMapping assign_partitions(int n_lans, int n_lps) {
    if (n_lps < 1 || n_lps > n_lans + 1)
        throw std::invalid_argument("lp count must be in [1, n_lans+1], got " +
                                    std::to_string(n_lps) + " for " + std::to_string(n_lans) +
                                    " lans");
    PartitionMapping m;
    m.n_lps = n_lps;
    m.group_to_lp.resize(static_cast<std::size_t>(n_lans) + 1);
    if (n_lps == n_lans + 1) {
        for (int j = 0; j < n_lans; ++j) m.group_to_lp[static_cast<std::size_t>(j)] = j;
        m.group_to_lp[static_cast<std::size_t>(n_lans)] = n_lans;
    } else {
        for (int j = 0; j < n_lans; ++j) m.group_to_lp[static_cast<std::size_t>(j)] = j % n_lps;
        m.group_to_lp[static_cast<std::size_t>(n_lans)] = n_lps - 1;
    }
    return m;
}

LpBuild build_partition_lp(const Topology& topo, const Scenario& scenario,
                           const PartitionMapping& mapping, int lp) {
    LpBuild b;
    b.kernel = std::make_unique<Kernel>(PathTable(topo.paths()));
    Kernel& k = *b.kernel;

    auto lp_of_node = [&](int n) {
        return mapping.lp_of_group(topo.nodes[static_cast<std::size_t>(n)].group);
    };

    // Local modules, in path (= node index) order.
    std::vector<NetNode*> node_ptr(topo.nodes.size(), nullptr);
    for (std::size_t n = 0; n < topo.nodes.size(); ++n) {
        if (lp_of_node(static_cast<int>(n)) != lp) continue;
        auto mod = std::make_unique<NetNode>(&topo, static_cast<int>(n), &scenario);
        NetNode* p = mod.get();
        k.add_module(std::move(mod), topo.nodes[n].path);
        node_ptr[n] = p;
        b.local_nodes.push_back(p);
    }

    // Channels: two directed channels per link. Cut channels get globally
    // enumerated proxy-link ids so that every LP agrees on the numbering.
    int next_proxy = 0;
    for (const TopoLink& l : topo.links) {
        const int dir_node[2][2] = {{l.a, l.b}, {l.b, l.a}};
        for (auto [src, dst] : dir_node) {
            int src_lp = lp_of_node(src), dst_lp = lp_of_node(dst);
            const std::string& src_path = topo.nodes[static_cast<std::size_t>(src)].path;
            const std::string& dst_path = topo.nodes[static_cast<std::size_t>(dst)].path;
            int ch = -1;
            if (src_lp == dst_lp) {
                if (src_lp == lp) ch = k.add_channel(src_path, dst_path, l.delay, l.rate_bps);
            } else {
                if (l.delay <= SimTime{})
                    throw std::runtime_error("cut link " + src_path + " -> " + dst_path +
                                             " has zero delay; lookahead would vanish");
                ProxyLink pl{next_proxy++, src_lp, dst_lp, l.delay};
                if (src_lp == lp) {
                    ch = k.add_proxy_channel(src_path, dst_path, pl.id, l.delay, l.rate_bps);
                    b.out_links.push_back(pl);
                }
                if (dst_lp == lp) b.in_links.push_back(pl);
            }
            if (ch >= 0 && node_ptr[static_cast<std::size_t>(src)]) {
                NetNode& nn = *node_ptr[static_cast<std::size_t>(src)];
                for (NetNode::Interface& f : nn.interfaces())
                    if (f.peer_node == dst) f.channel = ch;
            }
        }
    }

    // DMSI registrations: every interface of the whole model under
    // "ethermac" (remote ones without a handler), plus one configurator per
    // LP under "ipv4cfg".
    for (const TopoInterface& ti : topo.interfaces) {
        int owner_lp = lp_of_node(ti.node);
        DmsiHandler h;
        if (owner_lp == lp) {
            NetNode* nn = node_ptr[static_cast<std::size_t>(ti.node)];
            int if_idx = -1;
            for (std::size_t i = 0; i < nn->interfaces().size(); ++i)
                if (nn->interfaces()[i].full_path == ti.path) if_idx = static_cast<int>(i);
            h = [nn, if_idx](int stage, DmsiState& tok) { nn->ether_dmsi(if_idx, stage, tok); };
        }
        b.registry.register_instance("ethermac", ti.path, owner_lp, std::move(h));
    }

    b.configurator = std::make_unique<Configurator>(&topo, &scenario, "cfg.lp" + two_digits(lp),
                                                    b.local_nodes);
    for (int other = 0; other < mapping.n_lps; ++other) {
        DmsiHandler h;
        if (other == lp) {
            Configurator* c = b.configurator.get();
            h = [c](int stage, DmsiState& tok) { c->dmsi(stage, tok); };
        }
        b.registry.register_instance("ipv4cfg", "cfg.lp" + two_digits(other), other,
                                     std::move(h));
    }

    return b;
}

std::optional<SimTime> compute_lookahead(const Topology& topo, const PartitionMapping& mapping,
                                         int a, int b) {
    std::optional<SimTime> best;
    for (const TopoLink& l : topo.links) {
        int lp_a = mapping.lp_of_group(topo.nodes[static_cast<std::size_t>(l.a)].group);
        int lp_b = mapping.lp_of_group(topo.nodes[static_cast<std::size_t>(l.b)].group);
        bool forward = (lp_a == a && lp_b == b) || (lp_b == a && lp_a == b);
        if (!forward) continue;
        if (!best || l.delay < *best) best = l.delay;
    }
    return best;
}

}  // namespace parsim
