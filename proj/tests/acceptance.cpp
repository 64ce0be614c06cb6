// Acceptance gate: one pass/fail line per criterion, nonzero exit on failure.
// argv[1] = path to the parsim CLI (needed to spawn tcp workers).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "parsim/dmsi.hpp"
#include "parsim/dmsi_driver.hpp"
#include "parsim/harness.hpp"
#include "parsim/inbox.hpp"
#include "parsim/netstack.hpp"
#include "parsim/partition.hpp"
#include "parsim/rng.hpp"
#include "parsim/topology.hpp"
#include "parsim/transport.hpp"

using namespace parsim;

namespace {

int g_failures = 0;
std::string g_dir;
std::string g_exe;
bool g_conservatism_violated = false;
std::string g_conservatism_note;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

Scenario desk_scenario(std::uint64_t seed, SimTime gateway_delay) {
    Scenario s;
    s.n_lans = 8;
    s.seed = seed;
    s.sim_time = SimTime::from_ms(10);
    s.p_local = 0.5;
    s.gateway_delay = gateway_delay;
    finalize_scenario(s);
    return s;
}

std::string path_in_dir(const std::string& name) { return g_dir + "/" + name; }

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    std::vector<std::string> lines;
    std::string l;
    while (std::getline(in, l)) lines.push_back(l);
    return lines;
}

// Flags runs aborted by the conservatism assertions (criterion 8).
void note_violation(const std::string& what) {
    if (what.find("causality") != std::string::npos ||
        what.find("EIT") != std::string::npos || what.find("EOT") != std::string::npos ||
        what.find("safe") != std::string::npos) {
        g_conservatism_violated = true;
        g_conservatism_note = what;
    }
}

RunReport run_or_die(const Scenario& s, const RunOptions& o) {
    try {
        return run_scenario(s, o);
    } catch (const std::exception& ex) {
        note_violation(ex.what());
        throw;
    }
}

// Criterion 1 + part of 8: determinism across seeds, mappings, transports.
void criterion_determinism() {
    bool pass = true;
    std::string detail;
    try {
        for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
            Scenario s = desk_scenario(seed, SimTime::from_us(10));
            std::string ref = path_in_dir("ref" + std::to_string(seed) + ".trace");
            RunOptions seq;
            seq.mode = RunOptions::Mode::solo;
            seq.trace_out = ref;
            run_or_die(s, seq);
            for (int lps : {1, 2, 5, 9}) {
                for (auto mode : {RunOptions::Mode::inproc, RunOptions::Mode::tcp}) {
                    RunOptions o;
                    o.mode = mode;
                    o.n_lps = lps;
                    o.exe_path = g_exe;
                    o.port_base = 21000 + lps * 40;
                    o.trace_out = path_in_dir("cand.trace");
                    run_or_die(s, o);
                    CompareResult c = compare_trace_files(ref, o.trace_out);
                    if (!c.equal) {
                        pass = false;
                        detail = "seed " + std::to_string(seed) + ", " +
                                 std::to_string(lps) + " LPs, " +
                                 (mode == RunOptions::Mode::tcp ? "tcp" : "inproc") +
                                 ": first difference at trace line " + std::to_string(c.line);
                    }
                }
            }
        }
    } catch (const std::exception& ex) {
        pass = false;
        detail = std::string("run aborted: ") + ex.what();
    }
    if (pass)
        detail = "desk traces byte-identical for 3 seeds x {1,2,5,9} LPs x {inproc,tcp}";
    report(1, pass, detail);
}

// Criteria 2 and 3: full-size init dumps across mappings {1, 12, 58}.
void criteria_init_dumps() {
    std::vector<std::vector<std::string>> dumps;
    std::string err;
    try {
        Scenario s;
        s.n_lans = 57;
        s.seed = 1;
        finalize_scenario(s);
        for (int lps : {1, 12, 58}) {
            RunOptions o;
            o.mode = lps == 1 ? RunOptions::Mode::solo : RunOptions::Mode::inproc;
            o.n_lps = lps;
            o.init_only = true;
            o.dump_out = path_in_dir("init" + std::to_string(lps) + ".dump");
            run_or_die(s, o);
            dumps.push_back(read_lines(o.dump_out));
        }
    } catch (const std::exception& ex) {
        err = ex.what();
    }

    if (!err.empty()) {
        report(2, false, "init run aborted: " + err);
        report(3, false, "init run aborted: " + err);
        return;
    }

    // MAC uniqueness + cross-mapping identity.
    bool mac_pass = true;
    std::string mac_detail;
    std::vector<std::vector<std::string>> mac_lines;
    for (const auto& d : dumps) {
        std::vector<std::string> macs;
        std::vector<std::string> values;
        for (const std::string& l : d)
            if (l.rfind("mac.", 0) == 0) {
                macs.push_back(l);
                values.push_back(l.substr(l.rfind(' ') + 1));
            }
        std::sort(values.begin(), values.end());
        if (std::adjacent_find(values.begin(), values.end()) != values.end()) {
            mac_pass = false;
            mac_detail = "duplicate MAC within one mapping";
        }
        if (macs.empty()) {
            mac_pass = false;
            mac_detail = "no MAC lines in dump";
        }
        mac_lines.push_back(std::move(macs));
    }
    if (mac_pass && (mac_lines[0] != mac_lines[1] || mac_lines[0] != mac_lines[2])) {
        mac_pass = false;
        mac_detail = "MAC assignment differs between mappings";
    }
    if (mac_pass)
        mac_detail = std::to_string(mac_lines[0].size()) +
                     " interface MACs injective and identical for {1,12,58} LPs";
    report(2, mac_pass, mac_detail);

    // IPv4 map + routing tables.
    bool cfg_pass = true;
    std::string cfg_detail;
    std::vector<std::vector<std::string>> cfg_lines;
    for (const auto& d : dumps) {
        std::vector<std::string> lines;
        for (const std::string& l : d)
            if (l.rfind("addr.", 0) == 0 || l.rfind("route.", 0) == 0) lines.push_back(l);
        if (lines.empty()) {
            cfg_pass = false;
            cfg_detail = "no addr/route lines in dump";
        }
        cfg_lines.push_back(std::move(lines));
    }
    if (cfg_pass && (cfg_lines[0] != cfg_lines[1] || cfg_lines[0] != cfg_lines[2])) {
        cfg_pass = false;
        cfg_detail = "address map or routing tables differ between mappings";
    }
    if (cfg_pass)
        cfg_detail = std::to_string(cfg_lines[0].size()) +
                     " address/route lines identical for {1,12,58} LPs";
    report(3, cfg_pass, cfg_detail);
}

// Criterion 4: connection state must be decided by stage 2, with no silent
// defaults, including across LPs.
void criterion_connection_staging() {
    bool pass = true;
    std::string detail;
    try {
        Scenario s;
        s.n_lans = 2;
        s.seed = 1;
        finalize_scenario(s);
        Topology topo = generate_topology(s);
        PartitionMapping mapping = assign_partitions(2, 2);
        InProcHub hub(2);
        std::vector<LpBuild> builds;
        for (int lp = 0; lp < 2; ++lp) builds.push_back(build_partition_lp(topo, s, mapping, lp));
        // Dangle one gate on LP 0: its host answers "not connected".
        NetNode* dangled = nullptr;
        for (NetNode* n : builds[0].local_nodes)
            if (n->is_host() && !n->interfaces().empty()) {
                dangled = n;
                n->interfaces()[0].channel = -1;
                break;
            }
        // Probe instances run after "ethermac" within each stage (kind walk
        // order is sorted), so their stage-2 snapshot shows exactly what is
        // known at stage 2.
        struct Snapshot {
            std::string path;
            int peer_node;
            int channel;
            bool connected, checked;
        };
        std::vector<std::vector<Snapshot>> at_stage2(2);
        for (int lp = 0; lp < 2; ++lp) {
            auto& snaps = at_stage2[static_cast<std::size_t>(lp)];
            auto& nodes = builds[static_cast<std::size_t>(lp)].local_nodes;
            builds[static_cast<std::size_t>(lp)].registry.register_instance(
                "zzprobe", "probe.lp" + std::to_string(lp), lp,
                [&snaps, &nodes](int stage, DmsiState&) {
                    if (stage != 2) return;
                    for (NetNode* n : nodes)
                        for (auto& f : n->interfaces())
                            snaps.push_back({f.full_path, f.peer_node, f.channel,
                                             f.connected, f.connection_checked});
                });
        }
        std::vector<std::string> errs(2);
        auto worker = [&](int lp) {
            try {
                EnvelopeInbox inbox(hub.endpoint(lp), std::chrono::milliseconds(60000));
                DmsiDriver driver(*builds[static_cast<std::size_t>(lp)].kernel,
                                  builds[static_cast<std::size_t>(lp)].registry, &inbox, lp, 2);
                driver.run_all(kNumInitStages);
            } catch (const std::exception& ex) {
                errs[static_cast<std::size_t>(lp)] = ex.what();
            }
        };
        std::thread t1(worker, 1);
        worker(0);
        t1.join();
        for (const std::string& e : errs)
            if (!e.empty()) throw std::runtime_error(e);

        int cross_checked = 0;
        for (int lp = 0; lp < 2 && pass; ++lp)
            for (const Snapshot& f : at_stage2[static_cast<std::size_t>(lp)]) {
                bool cross =
                    f.peer_node >= 0 &&
                    mapping.lp_of_group(
                        topo.nodes[static_cast<std::size_t>(f.peer_node)].group) != lp;
                if (!f.checked) {
                    pass = false;
                    detail = f.path + " still undecided at stage 2";
                } else if (cross && f.channel >= 0 && !f.connected) {
                    pass = false;
                    detail = "cross-LP pair " + f.path + " not connected at stage 2";
                }
                if (cross && f.channel >= 0) ++cross_checked;
            }
        if (pass && cross_checked == 0) {
            pass = false;
            detail = "no cross-LP pairs exercised";
        }
        // The dangled gate and its far end must both report false at stage 2.
        if (pass && dangled == nullptr) {
            pass = false;
            detail = "no gate dangled";
        }
        if (pass) {
            const std::string dangled_path = dangled->interfaces()[0].full_path;
            const std::string peer_path = dangled->interfaces()[0].peer_path;
            int seen = 0;
            for (const auto& snaps : at_stage2)
                for (const Snapshot& f : snaps)
                    if (f.path == dangled_path || f.path == peer_path) {
                        ++seen;
                        if (f.connected || !f.checked) {
                            pass = false;
                            detail = f.path + " believes the dangled link is connected";
                        }
                    }
            if (seen != 2) {
                pass = false;
                detail = "dangled pair not fully observed";
            }
        }

        // No silent defaults: randomized request/answer property.
        std::mt19937_64 gen(5);
        for (int round = 0; round < 200 && pass; ++round) {
            DmsiState tok;
            int n_req = 1 + static_cast<int>(gen() % 8);
            std::vector<std::pair<std::string, bool>> reqs;  // (requester, answered)
            for (int i = 0; i < n_req; ++i) {
                std::string who = "m" + std::to_string(i);
                bool answer = gen() % 2 == 0;
                tok.enqueue_request(who, "t", Bytes{});
                reqs.emplace_back(who, answer);
            }
            tok.answer_requests([&](const DmsiState::Request& r) -> std::optional<Bytes> {
                for (auto& [who, answered] : reqs)
                    if (who == r.requester && answered) return Bytes{1};
                return std::nullopt;
            });
            for (auto& [who, answered] : reqs) {
                if (answered) {
                    if (tok.take_response(who, "t") != Bytes{1}) {
                        pass = false;
                        detail = "answered request returned wrong payload";
                    }
                } else {
                    try {
                        tok.take_response(who, "t");
                        pass = false;
                        detail = "unanswered request consumed silently";
                    } catch (const std::runtime_error&) {
                        // expected abort
                    }
                }
            }
        }
    } catch (const std::exception& ex) {
        note_violation(ex.what());
        pass = false;
        detail = std::string("aborted: ") + ex.what();
    }
    if (pass)
        detail = "cross-LP pairs connected at stage 2, dangled gate false, "
                 "unanswered requests abort";
    report(4, pass, detail);
}

void criterion_socket_ids() {
    UdpLayer u;
    u.set_next_socket_id((1u << 31) - 5);
    std::vector<std::uint32_t> ids;
    for (int i = 0; i < 10; ++i) ids.push_back(u.bind());
    bool pass = true;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i > 0 && ids[i] <= ids[i - 1]) pass = false;  // distinct + increasing
    }
    std::string detail = pass ? "10 binds from 2^31-5: distinct, non-negative, "
                                "strictly increasing (" +
                                    std::to_string(ids.front()) + ".." +
                                    std::to_string(ids.back()) + ")"
                              : "socket ids not strictly increasing past 2^31";
    report(5, pass, detail);
}

void criterion_traffic_model() {
    bool pass = true;
    std::string detail;
    TrafficTargets targets;
    for (int i = 0; i < 56; ++i) targets.local_hosts.push_back(Ipv4Addr{0x0A000001u + static_cast<std::uint32_t>(i)});
    for (int i = 0; i < 399; ++i) targets.remote_hosts.push_back(Ipv4Addr{0x0A010001u + static_cast<std::uint32_t>(i)});
    const SimTime mean_ia = SimTime::from_us(20);
    for (double p_local : {0.5, 0.9}) {
        RngStream rng = RngStream::derive(1, "acceptance.traffic." + std::to_string(p_local));
        const int n = 100000;
        double sum_ia = 0, sum_size = 0;
        int local = 0;
        for (int i = 0; i < n; ++i) {
            auto d = app_step(rng, targets, p_local, mean_ia, 200.0);
            if (!d) {
                pass = false;
                detail = "draw unexpectedly empty";
                break;
            }
            sum_ia += static_cast<double>(d->delay.ticks());
            sum_size += static_cast<double>(d->size_bytes);
            if (d->local) ++local;
        }
        double mean_ia_obs = sum_ia / n / 1e6;        // us
        double mean_size_obs = sum_size / n;          // bytes
        double frac_local = static_cast<double>(local) / n;
        if (std::abs(mean_ia_obs - 20.0) > 0.02 * 20.0) {
            pass = false;
            detail = "mean inter-arrival off: " + std::to_string(mean_ia_obs) + " us";
        }
        if (std::abs(mean_size_obs - 200.0) > 0.02 * 200.0) {
            pass = false;
            detail = "mean size off: " + std::to_string(mean_size_obs) + " B";
        }
        if (std::abs(frac_local - p_local) > 0.02) {
            pass = false;
            detail = "local fraction off at p_local " + std::to_string(p_local) + ": " +
                     std::to_string(frac_local);
        }
    }
    if (pass)
        detail = "1e5 draws: inter-arrival, size, and local fraction within 2% "
                 "for p_local {0.5, 0.9}";
    report(6, pass, detail);
}

void criterion_lookahead_trend() {
    unsigned cores = std::thread::hardware_concurrency();
    if (cores < 4) {
        report(7, false,
               "needs >= 4 cores for a meaningful 4-LP speedup; this machine has " +
                   std::to_string(cores) +
                   "; gateway-delay sweep skipped (measurement would be wall-clock noise)");
        return;
    }
    bool pass = true;
    std::string detail;
    try {
        std::vector<SimTime> delays = {SimTime::from_ns(10), SimTime::from_us(1),
                                       SimTime::from_us(10), SimTime::from_us(100)};
        std::vector<double> median_speedup;
        for (SimTime d : delays) {
            Scenario s = desk_scenario(1, d);
            RunOptions seq;
            seq.mode = RunOptions::Mode::solo;
            double seq_time = run_or_die(s, seq).wall_seconds;
            std::vector<double> speedups;
            for (int rep = 0; rep < 5; ++rep) {
                RunOptions par;
                par.mode = RunOptions::Mode::inproc;
                par.n_lps = 4;
                double t = run_or_die(s, par).wall_seconds;
                speedups.push_back(seq_time / t);
            }
            std::sort(speedups.begin(), speedups.end());
            median_speedup.push_back(speedups[2]);
        }
        double at_10ns = median_speedup[0], at_10us = median_speedup[2];
        std::ostringstream os;
        os << "median speedups {10ns,1us,10us,100us} = {";
        for (std::size_t i = 0; i < median_speedup.size(); ++i)
            os << (i ? "," : "") << median_speedup[i];
        os << "}";
        detail = os.str();
        if (!(at_10us > at_10ns)) {
            pass = false;
            detail += "; speedup at 10us not above 10ns";
        }
        if (!(at_10us >= 1.3)) {
            pass = false;
            detail += "; speedup at 10us below 1.3";
        }
    } catch (const std::exception& ex) {
        pass = false;
        detail = std::string("aborted: ") + ex.what();
    }
    report(7, pass, detail);
}

void criterion_conservatism() {
    // Causality (event time below the safe horizon) and EIT/EOT regressions
    // are hard assertions inside the runtime; any violation would have
    // aborted one of the runs above.
    report(8, !g_conservatism_violated,
           g_conservatism_violated
               ? "violation observed: " + g_conservatism_note
               : "zero causality and zero EIT/EOT violations across all runs "
                 "(asserted in the runtime, any hit aborts)");
}

std::pair<bool, std::string> criterion_progress_runs() {
    bool pass = true;
    std::string detail;
    std::mt19937_64 gen(99);
    int done = 0;
    try {
        for (int c = 0; c < 50; ++c) {
            Scenario s;
            s.n_lans = 1 + static_cast<int>(gen() % 4);
            s.seed = gen();
            s.sim_time = SimTime::from_us(100 + gen() % 400);
            s.p_local = static_cast<double>(gen() % 101) / 100.0;
            s.mean_interarrival = SimTime::from_us(5 + gen() % 40);
            s.gateway_delay = SimTime(1 + static_cast<std::int64_t>(gen() % 10'000'000));
            s.intra_lan_delay = SimTime(1 + static_cast<std::int64_t>(gen() % 100'000'000));
            s.backbone_delay = SimTime(1 + static_cast<std::int64_t>(gen() % 100'000'000));
            s.watchdog_seconds = 60;
            finalize_scenario(s);
            int n_lps = 1 + static_cast<int>(gen() % static_cast<std::uint64_t>(s.n_lans + 1));
            RunOptions o;
            o.mode = n_lps == 1 ? RunOptions::Mode::solo : RunOptions::Mode::inproc;
            o.n_lps = n_lps;
            run_or_die(s, o);
            ++done;
        }
    } catch (const std::exception& ex) {
        pass = false;
        detail = "case " + std::to_string(done) + " failed: " + ex.what();
    }
    if (pass) detail = "50 randomized scenarios all terminated within the 60 s watchdog";
    return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <path-to-parsim-cli>\n");
        return 2;
    }
    g_exe = argv[1];
    char tmpl[] = "/tmp/parsim_accept_XXXXXX";
    if (!mkdtemp(tmpl)) {
        std::fprintf(stderr, "cannot create scratch directory\n");
        return 2;
    }
    g_dir = tmpl;

    criterion_determinism();
    criteria_init_dumps();
    criterion_connection_staging();
    criterion_socket_ids();
    criterion_traffic_model();
    criterion_lookahead_trend();
    // Run the progress cases before reporting conservatism so that any
    // violation they trigger counts toward criterion 8.
    auto [progress_pass, progress_detail] = criterion_progress_runs();
    criterion_conservatism();
    report(9, progress_pass, progress_detail);

    std::string cmd = "rm -rf " + g_dir;
    if (std::system(cmd.c_str()) != 0)
        std::fprintf(stderr, "warning: could not remove %s\n", g_dir.c_str());
    std::printf("%d of 9 criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
