#include "parsim/netstack.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace parsim {

std::uint32_t subnet_base(int subnet) {
    int j = (subnet == kBackboneSubnet) ? kBackboneSubnetNumber : subnet;
    if (j < 0 || j > 255) throw std::invalid_argument("subnet index out of range");
    return (10u << 24) | (static_cast<std::uint32_t>(j) << 16);
}

MacAddr auto_assign_mac(DmsiState& token) {
    std::uint64_t counter = token.get_u64("macCounter").value_or(0);
    if (counter + 1 > kMacCounterMax)
        throw std::runtime_error("MAC address counter exhausted");
    ++counter;
    token.put_u64("macCounter", counter);
    return MacAddr{kMacPrefix | counter};
}

// RoutingTable -------------------------------------------------------------

void RoutingTable::add(const Route& r) {
    if (r.prefix_len == 32) {
        host_routes_[r.base] = r;
        return;
    }
    auto pos = std::lower_bound(prefix_routes_.begin(), prefix_routes_.end(), r,
                                [](const Route& a, const Route& b) {
                                    if (a.prefix_len != b.prefix_len)
                                        return a.prefix_len > b.prefix_len;
                                    return a.base < b.base;
                                });
    prefix_routes_.insert(pos, r);
}

const Route* RoutingTable::lookup(Ipv4Addr dst) const {
    auto it = host_routes_.find(dst.value);
    if (it != host_routes_.end()) return &it->second;
    for (const Route& r : prefix_routes_) {
        std::uint32_t mask =
            r.prefix_len == 0 ? 0 : ~std::uint32_t(0) << (32 - r.prefix_len);
        if ((dst.value & mask) == r.base) return &r;
    }
    return nullptr;
}

std::vector<std::string> RoutingTable::dump() const {
    std::vector<std::string> lines;
    for (const auto& [base, r] : host_routes_)
        lines.push_back(Ipv4Addr{base}.to_string() + "/32 via " + r.next_hop_path);
    for (const Route& r : prefix_routes_)
        lines.push_back(Ipv4Addr{r.base}.to_string() + "/" + std::to_string(r.prefix_len) +
                        " via " + r.next_hop_path);
    std::sort(lines.begin(), lines.end());
    return lines;
}

// UdpLayer -----------------------------------------------------------------

std::uint32_t UdpLayer::bind() {
    if (next_id_ == std::numeric_limits<std::uint32_t>::max())
        throw std::runtime_error("UDP socket id space exhausted on this node");
    std::uint32_t id = next_id_++;
    bound_.push_back(id);
    return id;
}

bool UdpLayer::is_bound(std::uint32_t id) const {
    return std::find(bound_.begin(), bound_.end(), id) != bound_.end();
}

// app_step -----------------------------------------------------------------

std::optional<AppDraw> app_step(RngStream& rng, const TrafficTargets& targets, double p_local,
                                SimTime mean_interarrival, double mean_size_bytes) {
    AppDraw d;
    double delay = rng.exponential(static_cast<double>(mean_interarrival.ticks()));
    d.delay = SimTime(static_cast<std::int64_t>(std::ceil(delay)));
    bool want_local = rng.uniform01() < p_local;
    if (want_local && targets.local_hosts.empty()) want_local = false;
    if (!want_local && targets.remote_hosts.empty()) want_local = true;
    const auto& pool = want_local ? targets.local_hosts : targets.remote_hosts;
    if (pool.empty()) return std::nullopt;
    d.local = want_local;
    d.target = pool[rng.below(pool.size())];
    double size = rng.exponential(mean_size_bytes);
    d.size_bytes = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(size)));
    return d;
}

// NetNode ------------------------------------------------------------------

NetNode::NetNode(const Topology* topo, int node_index, const Scenario* scenario)
    : topo_(topo), scenario_(scenario), node_index_(node_index) {
    const TopoNode& n = topo->nodes[static_cast<std::size_t>(node_index)];
    is_host_ = n.is_host;
    lan_ = n.group;
    for (int ii : topo->node_interfaces[static_cast<std::size_t>(node_index)]) {
        const TopoInterface& ti = topo->interfaces[static_cast<std::size_t>(ii)];
        Interface f;
        f.name = ti.name;
        f.full_path = ti.path;
        f.peer_path = ti.peer_path;
        f.peer_node = ti.peer_node;
        f.subnet = ti.subnet;
        ifs_.push_back(std::move(f));
    }
}

Ipv4Addr NetNode::primary_addr() const {
    if (ifs_.empty()) return Ipv4Addr{};
    return ifs_[0].addr;
}

int NetNode::interface_to(int peer_node) const {
    for (std::size_t i = 0; i < ifs_.size(); ++i)
        if (ifs_[i].peer_node == peer_node) return static_cast<int>(i);
    throw std::logic_error(path() + " has no interface toward neighbor");
}

void NetNode::ether_dmsi(int if_idx, int stage, DmsiState& token) {
    Interface& f = ifs_[static_cast<std::size_t>(if_idx)];
    switch (stage) {
        case 0:
            f.mac = auto_assign_mac(token);
            token.put_u64("mac." + f.full_path, f.mac.value);
            if (f.channel >= 0) {
                token.enqueue_request(f.full_path, "conn:" + f.peer_path, Bytes{});
            } else {
                // Dangling gate: no channel attached, decidable locally.
                f.connected = false;
                f.connection_checked = true;
            }
            break;
        case 1:
            token.answer_requests_for_tag(
                "conn:" + f.full_path, [&](const DmsiState::Request&) -> std::optional<Bytes> {
                    ByteWriter w;
                    w.u8(f.channel >= 0 ? 1 : 0);
                    return w.take();
                });
            break;
        case 2:
            if (f.channel >= 0) {
                Bytes resp = token.take_response(f.full_path, "conn:" + f.peer_path);
                ByteReader r(resp);
                f.connected = r.u8() != 0;
                f.connection_checked = true;
                if (f.connected) {
                    auto peer_mac = token.get_u64("mac." + f.peer_path);
                    if (!peer_mac)
                        throw std::runtime_error("no MAC announced for " + f.peer_path);
                    f.peer_mac = MacAddr{*peer_mac};
                }
            }
            break;
        default:
            break;
    }
}

void NetNode::init(int stage) {
    if (stage == 3 && is_host_) app_start();
}

void NetNode::app_start() {
    app_rng_ = RngStream::derive(scenario_->seed, path() + ".app");
    app_socket_ = udp_.bind();
    app_active_ = true;
    app_fire();  // schedules the first departure; nothing is sent at t=0
}

void NetNode::app_fire() {
    auto draw = app_step(app_rng_, targets_, scenario_->p_local, scenario_->mean_interarrival,
                         scenario_->mean_size_bytes);
    if (!draw) return;  // no reachable targets; stay silent
    SimTime next = kernel().now() + draw->delay;
    if (next > scenario_->sim_time) return;  // generation horizon reached
    if (!udp_.is_bound(app_socket_)) throw std::logic_error("send on unbound socket");
    pending_ = *draw;
    Message timer;
    timer.kind = MsgKind::control;
    kernel().schedule_self(*this, next, timer);
}

void NetNode::send_datagram(const Message& msg) {
    const Route* r = routes_.lookup(msg.ip_dst);
    if (!r)
        throw std::runtime_error(path() + ": no route to " + msg.ip_dst.to_string());
    Interface& out = ifs_[static_cast<std::size_t>(r->out_interface)];
    if (!out.connected)
        throw std::runtime_error(path() + ": route via disconnected interface " + out.name);
    Message m = msg;
    m.mac_src = out.mac;
    m.mac_dst = out.peer_mac;
    kernel().send_via_gate(*this, out.channel, m);
}

void NetNode::handle(const Event& e) {
    const Message& m = e.payload;
    if (m.kind == MsgKind::control) {
        // departure timer: emit the drawn packet, then schedule the next one
        Message pkt;
        pkt.kind = MsgKind::frame;
        pkt.byte_length = pending_.size_bytes;
        pkt.ip_src = primary_addr();
        pkt.ip_dst = pending_.target;
        pkt.udp_src_port = static_cast<std::uint16_t>(1024 + (app_socket_ & 0x7fff));
        pkt.udp_dst_port = 9;
        pkt.app_seq = app_seq_++;
        pkt.app_send_time = kernel().now();
        send_datagram(pkt);
        ++stats_.sent;
        app_fire();
        return;
    }
    if (m.kind != MsgKind::frame)
        throw std::logic_error(path() + ": unexpected message kind");
    // local delivery?
    for (const Interface& f : ifs_) {
        if (f.addr == m.ip_dst && f.addr.value != 0) {
            if (!is_host_)
                throw std::logic_error(path() + ": datagram addressed to a router");
            ++stats_.received;
            stats_.delay_sum_ticks +=
                static_cast<std::uint64_t>((kernel().now() - m.app_send_time).ticks());
            return;
        }
    }
    send_datagram(m);  // forward
}

// Configurator -------------------------------------------------------------

Configurator::Configurator(const Topology* topo, const Scenario* scenario, std::string path,
                           std::vector<NetNode*> local_nodes)
    : topo_(topo), scenario_(scenario), path_(std::move(path)),
      local_nodes_(std::move(local_nodes)) {}

void Configurator::dmsi(int stage, DmsiState& token) {
    if (stage == 1) announce(token);
    if (stage == 2) configure(token);
}

void Configurator::announce(DmsiState& token) {
    for (NetNode* node : local_nodes_) {
        for (const NetNode::Interface& f : node->interfaces()) {
            std::string key = "if." + f.full_path;
            if (token.has(key))
                throw std::runtime_error("duplicate interface announcement: " + f.full_path);
            ByteWriter w;
            w.u32(static_cast<std::uint32_t>(static_cast<std::int32_t>(f.subnet)));
            token.put(key, w.take());
        }
    }
}

std::map<std::string, Ipv4Addr> Configurator::assign_addresses(
    const std::vector<std::pair<std::string, int>>& announced_ifaces) {
    std::map<std::string, Ipv4Addr> out;
    std::map<int, std::uint32_t> counter;
    for (const auto& [if_path, subnet] : announced_ifaces) {
        std::uint32_t& c = counter[subnet];
        if (c >= 0xFFFF)
            throw std::runtime_error("subnet " + std::to_string(subnet) +
                                     " has no free host addresses");
        ++c;
        out[if_path] = Ipv4Addr{subnet_base(subnet) + c};
    }
    return out;
}

void Configurator::configure(DmsiState& token) {
    // entries come back in key order = interface path order, identical on
    // every LP and for every partitioning
    std::vector<std::pair<std::string, int>> announced;
    for (const auto& [key, value] : token.entries_with_prefix("if.")) {
        ByteReader r(value);
        announced.emplace_back(key.substr(3),
                               static_cast<std::int32_t>(r.u32()));
    }
    std::map<std::string, Ipv4Addr> addr_of = assign_addresses(announced);

    // install local interface addresses
    for (NetNode* node : local_nodes_)
        for (NetNode::Interface& f : node->interfaces()) {
            auto it = addr_of.find(f.full_path);
            if (it == addr_of.end())
                throw std::runtime_error("interface never announced: " + f.full_path);
            f.addr = it->second;
            f.prefix_len = 16;
        }

    // routing tables
    for (NetNode* node : local_nodes_) {
        int idx = topo_->node_index(node->path());
        node->routes() = build_routes(*topo_, idx, addr_of);
    }

    // traffic target tables for hosts
    std::vector<std::pair<int, Ipv4Addr>> hosts;  // (lan, primary addr), path order
    std::vector<std::string> host_paths;
    for (const TopoNode& n : topo_->nodes) {
        if (!n.is_host) continue;
        auto it = addr_of.find(n.path + ".eth0");
        if (it == addr_of.end())
            throw std::runtime_error("host interface missing from address map: " + n.path);
        hosts.emplace_back(n.group, it->second);
        host_paths.push_back(n.path);
    }
    for (NetNode* node : local_nodes_) {
        if (!node->is_host()) continue;
        TrafficTargets t;
        for (std::size_t i = 0; i < hosts.size(); ++i) {
            if (host_paths[i] == node->path()) continue;
            if (hosts[i].first == node->lan())
                t.local_hosts.push_back(hosts[i].second);
            else
                t.remote_hosts.push_back(hosts[i].second);
        }
        node->set_traffic_targets(std::move(t));
    }
}

// build_routes -------------------------------------------------------------

RoutingTable build_routes(const Topology& topo, int node_index,
                          const std::map<std::string, Ipv4Addr>& address_of) {
    const std::size_t n = topo.nodes.size();
    std::vector<int> dist(n, -1);
    std::vector<int> first_hop(n, -1);
    std::queue<int> q;
    dist[static_cast<std::size_t>(node_index)] = 0;
    q.push(node_index);
    std::vector<int> order;
    order.reserve(n);
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        order.push_back(v);
        for (auto [peer, link] : topo.adj[static_cast<std::size_t>(v)])
            if (dist[static_cast<std::size_t>(peer)] < 0) {
                dist[static_cast<std::size_t>(peer)] = dist[static_cast<std::size_t>(v)] + 1;
                q.push(peer);
            }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (dist[i] < 0)
            throw std::runtime_error("unreachable node: " + topo.nodes[i].path + " from " +
                                     topo.nodes[static_cast<std::size_t>(node_index)].path);
    // Min first hop over all shortest paths; neighbor ids are in path order,
    // so min-by-id is min-by-path.
    for (int v : order) {
        if (v == node_index) continue;
        if (dist[static_cast<std::size_t>(v)] == 1) {
            first_hop[static_cast<std::size_t>(v)] = v;
            continue;
        }
        int best = -1;
        for (auto [peer, link] : topo.adj[static_cast<std::size_t>(v)]) {
            if (dist[static_cast<std::size_t>(peer)] != dist[static_cast<std::size_t>(v)] - 1)
                continue;
            int fh = first_hop[static_cast<std::size_t>(peer)];
            if (best < 0 || fh < best) best = fh;
        }
        first_hop[static_cast<std::size_t>(v)] = best;
    }

    const int my_group = topo.nodes[static_cast<std::size_t>(node_index)].group;
    auto out_if_toward = [&](int fh) {
        const auto& my_ifs = topo.node_interfaces[static_cast<std::size_t>(node_index)];
        for (std::size_t i = 0; i < my_ifs.size(); ++i)
            if (topo.interfaces[static_cast<std::size_t>(my_ifs[i])].peer_node == fh)
                return static_cast<int>(i);
        throw std::logic_error("first hop is not a neighbor");
    };

    RoutingTable table;
    // /32 routes to every interface of same-group nodes
    for (std::size_t d = 0; d < n; ++d) {
        if (static_cast<int>(d) == node_index) continue;
        if (topo.nodes[d].group != my_group) continue;
        int fh = first_hop[d];
        for (int ii : topo.node_interfaces[d]) {
            const TopoInterface& ti = topo.interfaces[static_cast<std::size_t>(ii)];
            auto it = address_of.find(ti.path);
            if (it == address_of.end()) continue;
            table.add(Route{it->second.value, 32, out_if_toward(fh), topo.nodes[static_cast<std::size_t>(fh)].path});
        }
    }
    // /16 routes to every other LAN (via its root) and, for LAN nodes, to
    // the backbone subnet via the attached backbone router
    std::vector<int> lan_root(256, -1);
    int my_backbone_attach = -1;
    for (std::size_t i = 0; i < n; ++i) {
        const TopoNode& nd = topo.nodes[i];
        if (!nd.is_host && nd.group >= 0 && nd.path.size() >= 4 &&
            nd.path.compare(nd.path.size() - 4, 4, "root") == 0)
            lan_root[static_cast<std::size_t>(nd.group)] = static_cast<int>(i);
    }
    if (my_group != kBackboneGroup) {
        int root = lan_root[static_cast<std::size_t>(my_group)];
        for (auto [peer, link] : topo.adj[static_cast<std::size_t>(root)])
            if (topo.nodes[static_cast<std::size_t>(peer)].group == kBackboneGroup)
                my_backbone_attach = peer;
    }
    for (int g = 0; g < 256; ++g) {
        if (lan_root[static_cast<std::size_t>(g)] < 0 || g == my_group) continue;
        int rep = lan_root[static_cast<std::size_t>(g)];
        int fh = first_hop[static_cast<std::size_t>(rep)];
        table.add(Route{subnet_base(g), 16, out_if_toward(fh),
                        topo.nodes[static_cast<std::size_t>(fh)].path});
    }
    if (my_group != kBackboneGroup && my_backbone_attach >= 0) {
        int fh = first_hop[static_cast<std::size_t>(my_backbone_attach)];
        table.add(Route{subnet_base(kBackboneSubnet), 16, out_if_toward(fh),
                        topo.nodes[static_cast<std::size_t>(fh)].path});
    }
    return table;
}

}  // namespace parsim
