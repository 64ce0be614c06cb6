#include "parsim/topology.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <queue>
#include <stdexcept>

namespace parsim {

namespace {

std::string two_digits(int v) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02d", v);
    return buf;
}

}  // namespace

int Topology::node_index(const std::string& path) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), path,
                               [](const TopoNode& n, const std::string& p) { return n.path < p; });
    if (it == nodes.end() || it->path != path)
        throw std::invalid_argument("unknown node path: " + path);
    return static_cast<int>(it - nodes.begin());
}

std::vector<std::string> Topology::paths() const {
    std::vector<std::string> p;
    p.reserve(nodes.size());
    for (const TopoNode& n : nodes) p.push_back(n.path);
    return p;
}

Topology generate_topology(const Scenario& s) {
    Topology t;

    struct RawLink {
        std::string a, b;
        SimTime delay;
        std::uint64_t rate;
        int subnet;
    };
    std::vector<RawLink> raw;

    auto bb_path = [&](int j) { return "net.bb.r" + two_digits(j); };

    // Backbone routers + edges among the first n_lans of the adjacency.
    int used_bb_edges = 0;
    for (int j = 0; j < s.n_lans; ++j)
        t.nodes.push_back(TopoNode{bb_path(j), false, kBackboneGroup});
    for (auto [a, b] : s.backbone_edges) {
        if (a >= s.n_lans || b >= s.n_lans) continue;
        raw.push_back(RawLink{bb_path(a), bb_path(b), s.backbone_delay, s.backbone_rate_bps,
                              kBackboneSubnet});
        ++used_bb_edges;
    }

    // One campus tree per backbone router.
    for (int j = 0; j < s.n_lans; ++j) {
        std::string lan = "net.lan" + two_digits(j) + ".";
        std::string root = lan + "root";
        t.nodes.push_back(TopoNode{root, false, j});
        for (int m = 0; m < 3; ++m) {
            std::string mid = lan + "mid" + std::to_string(m);
            t.nodes.push_back(TopoNode{mid, false, j});
            raw.push_back(RawLink{root, mid, s.intra_lan_delay, s.lan_rate_bps, j});
            for (int l = 0; l < 3; ++l) {
                std::string leaf = lan + "leaf" + std::to_string(m) + std::to_string(l);
                t.nodes.push_back(TopoNode{leaf, false, j});
                raw.push_back(RawLink{mid, leaf, s.intra_lan_delay, s.lan_rate_bps, j});
            }
        }
        for (int h = 0; h < 57; ++h) {
            std::string host = lan + "host" + two_digits(h);
            t.nodes.push_back(TopoNode{host, true, j});
            std::string attach;
            if (h < 3) {
                attach = root;
            } else {
                int leaf = (h - 3) / 6;  // 9 leaves, 6 hosts each
                attach = lan + "leaf" + std::to_string(leaf / 3) + std::to_string(leaf % 3);
            }
            raw.push_back(RawLink{attach, host, s.intra_lan_delay, s.host_rate_bps, j});
        }
        // Gateway: the swept LAN <-> backbone link.
        raw.push_back(
            RawLink{root, bb_path(j), s.gateway_delay, s.lan_rate_bps, kBackboneSubnet});
    }

    std::sort(t.nodes.begin(), t.nodes.end(),
              [](const TopoNode& a, const TopoNode& b) { return a.path < b.path; });

    for (const RawLink& r : raw) {
        TopoLink l;
        l.a = t.node_index(r.a);
        l.b = t.node_index(r.b);
        l.delay = r.delay;
        l.rate_bps = r.rate;
        l.subnet = r.subnet;
        t.links.push_back(l);
    }

    // Adjacency sorted by peer path (= peer index, since node order is path
    // order); interface names follow that order.
    t.adj.assign(t.nodes.size(), {});
    for (std::size_t li = 0; li < t.links.size(); ++li) {
        const TopoLink& l = t.links[li];
        t.adj[static_cast<std::size_t>(l.a)].emplace_back(l.b, static_cast<int>(li));
        t.adj[static_cast<std::size_t>(l.b)].emplace_back(l.a, static_cast<int>(li));
    }
    for (auto& nbrs : t.adj) std::sort(nbrs.begin(), nbrs.end());

    t.node_interfaces.assign(t.nodes.size(), {});
    for (std::size_t n = 0; n < t.nodes.size(); ++n) {
        int k = 0;
        for (auto [peer, link] : t.adj[n]) {
            TopoInterface itf;
            itf.node = static_cast<int>(n);
            itf.peer_node = peer;
            itf.link = link;
            itf.name = "eth" + std::to_string(k++);
            itf.path = t.nodes[n].path + "." + itf.name;
            itf.subnet = t.links[static_cast<std::size_t>(link)].subnet;
            t.node_interfaces[n].push_back(static_cast<int>(t.interfaces.size()));
            t.interfaces.push_back(itf);
        }
    }
    // Resolve far-end interface paths.
    std::map<std::pair<int, int>, int> by_node_link;  // (node, link) -> interface
    for (std::size_t i = 0; i < t.interfaces.size(); ++i)
        by_node_link[{t.interfaces[i].node, t.interfaces[i].link}] = static_cast<int>(i);
    for (TopoInterface& itf : t.interfaces)
        itf.peer_path = t.interfaces[static_cast<std::size_t>(
                            by_node_link.at({itf.peer_node, itf.link}))].path;

    // Connectivity check over the whole graph.
    if (!t.nodes.empty()) {
        std::vector<char> seen(t.nodes.size(), 0);
        std::queue<int> q;
        q.push(0);
        seen[0] = 1;
        std::size_t reached = 1;
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            for (auto [peer, link] : t.adj[static_cast<std::size_t>(v)])
                if (!seen[static_cast<std::size_t>(peer)]) {
                    seen[static_cast<std::size_t>(peer)] = 1;
                    ++reached;
                    q.push(peer);
                }
        }
        if (reached != t.nodes.size()) {
            std::string missing;
            for (std::size_t i = 0; i < t.nodes.size() && missing.size() < 200; ++i)
                if (!seen[i]) missing += " " + t.nodes[i].path;
            throw std::runtime_error("disconnected topology; unreachable:" + missing);
        }
    }

    return t;
}

}  // namespace parsim
