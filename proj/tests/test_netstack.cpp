#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <vector>

#include "doctest.h"
#include "parsim/netstack.hpp"
#include "parsim/topology.hpp"

using namespace parsim;

namespace {

Scenario tiny_scenario(int n_lans) {
    Scenario s;
    s.n_lans = n_lans;
    finalize_scenario(s);
    return s;
}

// Independent all-pairs BFS distances, adjacency walked in arbitrary order.
std::vector<std::vector<int>> all_pairs_bfs(const Topology& t) {
    std::size_t n = t.nodes.size();
    std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
    for (std::size_t src = 0; src < n; ++src) {
        auto& d = dist[src];
        d[src] = 0;
        std::queue<int> q;
        q.push(static_cast<int>(src));
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            for (auto [peer, link] : t.adj[static_cast<std::size_t>(v)])
                if (d[static_cast<std::size_t>(peer)] < 0) {
                    d[static_cast<std::size_t>(peer)] = d[static_cast<std::size_t>(v)] + 1;
                    q.push(peer);
                }
        }
    }
    return dist;
}

std::map<std::string, Ipv4Addr> address_plan(const Topology& t) {
    // interfaces are created grouped by node in path order, so their paths
    // are already sorted the way the configurator sees them
    std::vector<std::pair<std::string, int>> announced;
    for (const TopoInterface& f : t.interfaces) announced.emplace_back(f.path, f.subnet);
    std::sort(announced.begin(), announced.end());
    return Configurator::assign_addresses(announced);
}

}  // namespace

TEST_CASE("subnet bases: LAN j is 10.j.0.0, the backbone is 10.200.0.0") {
    CHECK(subnet_base(0) == 0x0A000000u);
    CHECK(subnet_base(3) == 0x0A030000u);
    CHECK(subnet_base(kBackboneSubnet) == 0x0AC80000u);
    CHECK_THROWS(subnet_base(256));
    CHECK_THROWS(subnet_base(-2));
}

TEST_CASE("MAC auto-assignment: prefix 0A:AA:00, counter from 1, hard stop") {
    DmsiState token;
    CHECK(auto_assign_mac(token).value == 0x0AAA00000001ULL);
    CHECK(auto_assign_mac(token).value == 0x0AAA00000002ULL);
    CHECK(token.get_u64("macCounter") == 2);
    token.put_u64("macCounter", kMacCounterMax - 1);
    CHECK(auto_assign_mac(token).value == (kMacPrefix | kMacCounterMax));
    CHECK_THROWS_WITH_AS(auto_assign_mac(token), doctest::Contains("exhausted"),
                         std::runtime_error);
}

TEST_CASE("address assignment: .1, .2, ... per subnet in announcement order") {
    auto m = Configurator::assign_addresses({{"a.eth0", 0},
                                             {"b.eth0", 0},
                                             {"b.eth1", kBackboneSubnet},
                                             {"c.eth0", 5}});
    CHECK(m.at("a.eth0").value == 0x0A000001u);
    CHECK(m.at("b.eth0").value == 0x0A000002u);
    CHECK(m.at("b.eth1").value == 0x0AC80001u);
    CHECK(m.at("c.eth0").value == 0x0A050001u);
    CHECK(m.at("a.eth0").to_string() == "10.0.0.1");
}

TEST_CASE("routing table: longest prefix wins, host routes first, misses are null") {
    RoutingTable rt;
    rt.add(Route{0x0A000000u, 16, 1, "wide"});
    rt.add(Route{0x0A000001u, 32, 2, "exact"});
    rt.add(Route{0x00000000u, 0, 3, "default"});
    CHECK(rt.lookup(Ipv4Addr{0x0A000001u})->next_hop_path == "exact");
    CHECK(rt.lookup(Ipv4Addr{0x0A0000FFu})->next_hop_path == "wide");
    CHECK(rt.lookup(Ipv4Addr{0x0B000001u})->next_hop_path == "default");
    RoutingTable empty;
    CHECK(empty.lookup(Ipv4Addr{1}) == nullptr);
    CHECK(rt.size() == 3);
    CHECK(rt.dump().size() == 3);
}

TEST_CASE("build_routes agrees with an independent shortest-path oracle") {
    Topology t = generate_topology(tiny_scenario(3));
    auto addr_of = address_plan(t);
    auto dist = all_pairs_bfs(t);

    // Expected first hop toward dst: the smallest-path neighbor lying on any
    // shortest path (neighbor index order is path order).
    auto expected_fh = [&](int src, int dst) {
        for (auto [peer, link] : t.adj[static_cast<std::size_t>(src)])
            if (1 + dist[static_cast<std::size_t>(peer)][static_cast<std::size_t>(dst)] ==
                dist[static_cast<std::size_t>(src)][static_cast<std::size_t>(dst)])
                return peer;  // adj is sorted, first match is the minimum
        FAIL("no first hop");
        return -1;
    };

    for (const std::string& src_path :
         {std::string("net.lan00.host05"), std::string("net.lan01.mid2"),
          std::string("net.lan02.root"), std::string("net.bb.r01")}) {
        int src = t.node_index(src_path);
        RoutingTable rt = build_routes(t, src, addr_of);
        int checked = 0;
        for (const TopoNode& n : t.nodes) {
            if (!n.is_host || n.path == src_path) continue;
            int dst = t.node_index(n.path);
            const Route* r = rt.lookup(addr_of.at(n.path + ".eth0"));
            REQUIRE(r != nullptr);
            int fh = expected_fh(src, dst);
            CHECK(r->next_hop_path == t.nodes[static_cast<std::size_t>(fh)].path);
            // The advertised out-interface really points at that neighbor.
            int ii = t.node_interfaces[static_cast<std::size_t>(src)]
                                      [static_cast<std::size_t>(r->out_interface)];
            CHECK(t.interfaces[static_cast<std::size_t>(ii)].peer_node == fh);
            ++checked;
        }
        CHECK(checked == 3 * 57 - (t.nodes[static_cast<std::size_t>(src)].is_host ? 1 : 0));
    }
}

TEST_CASE("udp socket ids: monotone per node, no reuse, exhaustion is fatal") {
    UdpLayer u;
    CHECK(u.bind() == 0);
    CHECK(u.bind() == 1);
    CHECK(u.is_bound(0));
    CHECK(!u.is_bound(7));

    // Boundary behavior near 2^31: ids keep increasing, none repeat.
    UdpLayer v;
    v.set_next_socket_id((1u << 31) - 5);
    std::vector<std::uint32_t> ids;
    for (int i = 0; i < 10; ++i) ids.push_back(v.bind());
    for (std::size_t i = 1; i < ids.size(); ++i) CHECK(ids[i] > ids[i - 1]);
    CHECK(ids.front() == (1u << 31) - 5);
    CHECK(ids.back() == (1u << 31) + 4);

    UdpLayer w;
    w.set_next_socket_id(std::numeric_limits<std::uint32_t>::max());
    CHECK_THROWS(w.bind());
}

TEST_CASE("app_step consumes draws in a fixed order and honors fallbacks") {
    TrafficTargets targets;
    targets.local_hosts = {Ipv4Addr{1}, Ipv4Addr{2}, Ipv4Addr{3}};
    targets.remote_hosts = {Ipv4Addr{10}, Ipv4Addr{11}};
    SimTime mean_ia = SimTime::from_us(20);

    SUBCASE("replaying the stream reproduces the draw exactly") {
        RngStream rng = RngStream::derive(42, "host.x.app");
        RngStream replay = rng;
        auto d = app_step(rng, targets, 0.5, mean_ia, 200.0);
        REQUIRE(d.has_value());
        SimTime exp_delay(static_cast<std::int64_t>(
            std::ceil(replay.exponential(static_cast<double>(mean_ia.ticks())))));
        bool local = replay.uniform01() < 0.5;
        const auto& pool = local ? targets.local_hosts : targets.remote_hosts;
        Ipv4Addr exp_target = pool[replay.below(pool.size())];
        auto exp_size = std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(std::ceil(replay.exponential(200.0))));
        CHECK(d->delay == exp_delay);
        CHECK(d->local == local);
        CHECK(d->target.value == exp_target.value);
        CHECK(d->size_bytes == exp_size);
    }
    SUBCASE("p_local = 1 never goes remote; p_local = 0 never stays local") {
        RngStream rng = RngStream::derive(1, "h");
        for (int i = 0; i < 200; ++i) {
            CHECK(app_step(rng, targets, 1.0, mean_ia, 200.0)->local);
            CHECK(!app_step(rng, targets, 0.0, mean_ia, 200.0)->local);
        }
    }
    SUBCASE("single-host LAN falls back to remote targets") {
        TrafficTargets lonely;
        lonely.remote_hosts = {Ipv4Addr{10}};
        RngStream rng = RngStream::derive(2, "h");
        for (int i = 0; i < 50; ++i) {
            auto d = app_step(rng, lonely, 0.9, mean_ia, 200.0);
            REQUIRE(d.has_value());
            CHECK(!d->local);
        }
    }
    SUBCASE("single-LAN scenario falls back to local targets") {
        TrafficTargets only_local;
        only_local.local_hosts = {Ipv4Addr{1}};
        RngStream rng = RngStream::derive(2, "h");
        auto d = app_step(rng, only_local, 0.1, mean_ia, 200.0);
        REQUIRE(d.has_value());
        CHECK(d->local);
    }
    SUBCASE("no targets at all: silent host") {
        TrafficTargets none;
        RngStream rng = RngStream::derive(2, "h");
        CHECK(!app_step(rng, none, 0.5, mean_ia, 200.0).has_value());
    }
    SUBCASE("sizes have a 1-byte floor") {
        RngStream rng = RngStream::derive(3, "h");
        for (int i = 0; i < 2000; ++i) {
            auto d = app_step(rng, targets, 0.5, mean_ia, 0.001);
            CHECK(d->size_bytes == 1);
        }
    }
}
