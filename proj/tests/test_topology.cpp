#include <unistd.h>
#include <fstream>
#include <set>

#include "doctest.h"
#include "parsim/topology.hpp"

using namespace parsim;

namespace {

Scenario small_scenario(int n_lans) {
    Scenario s;
    s.n_lans = n_lans;
    finalize_scenario(s);
    return s;
}

}  // namespace

TEST_CASE("node and link counts match the closed forms") {
    for (int n : {1, 2, 3, 5}) {
        Topology t = generate_topology(small_scenario(n));
        CHECK(static_cast<int>(t.nodes.size()) == expected_node_count(n));
        CHECK(static_cast<int>(t.nodes.size()) == 71 * n);
        int used = 0;
        for (const TopoLink& l : t.links)
            if (l.subnet == kBackboneSubnet &&
                !t.nodes[static_cast<std::size_t>(l.a)].is_host &&
                t.nodes[static_cast<std::size_t>(l.a)].group == kBackboneGroup &&
                t.nodes[static_cast<std::size_t>(l.b)].group == kBackboneGroup)
            ++used;
        CHECK(static_cast<int>(t.links.size()) == expected_link_count(n, used));
    }
    // Full benchmark size: 57 LANs, 71 nodes each.
    Topology big = generate_topology(small_scenario(57));
    CHECK(big.nodes.size() == 4047);
    // 70 tree+gateway links per LAN plus all 86 backbone edges.
    CHECK(big.links.size() == 70 * 57 + 86);
}

TEST_CASE("campus shape: 1 root, 3 mid, 9 leaf routers, 57 hosts per LAN") {
    Topology t = generate_topology(small_scenario(1));
    int roots = 0, mids = 0, leaves = 0, hosts = 0, bb = 0;
    for (const TopoNode& n : t.nodes) {
        if (n.group == kBackboneGroup) ++bb;
        else if (n.is_host) ++hosts;
        else if (n.path.find(".root") != std::string::npos) ++roots;
        else if (n.path.find(".mid") != std::string::npos) ++mids;
        else if (n.path.find(".leaf") != std::string::npos) ++leaves;
    }
    CHECK(bb == 1);
    CHECK(roots == 1);
    CHECK(mids == 3);
    CHECK(leaves == 9);
    CHECK(hosts == 57);

    auto degree = [&](const std::string& p) {
        return t.adj[static_cast<std::size_t>(t.node_index(p))].size();
    };
    // Hosts are single-homed; a leaf serves 6 hosts plus its mid; a mid has
    // the root plus 3 leaves; the root has 3 mids, 3 hosts, and the gateway.
    for (const TopoNode& n : t.nodes)
        if (n.is_host) CHECK(degree(n.path) == 1);
    CHECK(degree("net.lan00.leaf00") == 7);
    CHECK(degree("net.lan00.mid0") == 4);
    CHECK(degree("net.lan00.root") == 7);
    CHECK(degree("net.bb.r00") == 1);
    CHECK_THROWS_AS(t.node_index("net.lan00.nothere"), std::invalid_argument);
}

TEST_CASE("interfaces: eth names in peer-path order, far ends resolve mutually") {
    Topology t = generate_topology(small_scenario(2));
    // leaf00 neighbors, sorted by path: host03..host08, then mid0.
    int leaf = t.node_index("net.lan00.leaf00");
    const auto& ifs = t.node_interfaces[static_cast<std::size_t>(leaf)];
    REQUIRE(ifs.size() == 7);
    for (int k = 0; k < 6; ++k) {
        const TopoInterface& f =
            t.interfaces[static_cast<std::size_t>(ifs[static_cast<std::size_t>(k)])];
        CHECK(f.name == "eth" + std::to_string(k));
        CHECK(t.nodes[static_cast<std::size_t>(f.peer_node)].path ==
              "net.lan00.host0" + std::to_string(3 + k));
    }
    const TopoInterface& up = t.interfaces[static_cast<std::size_t>(ifs[6])];
    CHECK(up.name == "eth6");
    CHECK(up.path == "net.lan00.leaf00.eth6");
    CHECK(t.nodes[static_cast<std::size_t>(up.peer_node)].path == "net.lan00.mid0");

    // peer_path is an involution and interface paths are unique.
    std::set<std::string> paths;
    for (const TopoInterface& f : t.interfaces) CHECK(paths.insert(f.path).second);
    for (const TopoInterface& f : t.interfaces) {
        bool found = false;
        for (const TopoInterface& g : t.interfaces)
            if (g.path == f.peer_path) {
                CHECK(g.peer_path == f.path);
                found = true;
            }
        CHECK(found);
    }
}

TEST_CASE("gateway links carry the swept delay and backbone subnet") {
    Scenario s = small_scenario(2);
    s.gateway_delay = SimTime::from_ns(10);
    Topology t = generate_topology(s);
    int found = 0;
    for (const TopoLink& l : t.links) {
        const TopoNode& a = t.nodes[static_cast<std::size_t>(l.a)];
        const TopoNode& b = t.nodes[static_cast<std::size_t>(l.b)];
        bool gateway = (a.group == kBackboneGroup) != (b.group == kBackboneGroup);
        if (!gateway) continue;
        ++found;
        CHECK(l.delay == SimTime::from_ns(10));
        CHECK(l.subnet == kBackboneSubnet);
        CHECK(l.rate_bps == s.lan_rate_bps);
    }
    CHECK(found == 2);  // one per LAN
}

TEST_CASE("a backbone that leaves routers unreachable is rejected") {
    char buf[] = "/tmp/parsim_bb_XXXXXX";
    int fd = mkstemp(buf);
    REQUIRE(fd >= 0);
    close(fd);
    std::ofstream(buf) << "0 2\n1 2\n";  // first two routers not adjacent
    Scenario s;
    s.n_lans = 2;
    s.backbone_file = buf;
    finalize_scenario(s);
    CHECK_THROWS_WITH_AS(generate_topology(s), doctest::Contains("disconnected"),
                         std::runtime_error);
    std::remove(buf);
}
