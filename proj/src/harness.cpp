#include "parsim/harness.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "parsim/dmsi_driver.hpp"
#include "parsim/inbox.hpp"
#include "parsim/lp_runtime.hpp"
#include "parsim/tcp_transport.hpp"

namespace parsim {

namespace {

std::string hex16(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void collect_stats_lines(const std::vector<NetNode*>& nodes, std::vector<std::string>& out) {
    for (const NetNode* n : nodes) {
        if (!n->is_host()) continue;
        const HostStats& s = n->stats();
        out.push_back("host." + n->path() + ".delay_sum_ps " +
                      std::to_string(s.delay_sum_ticks));
        out.push_back("host." + n->path() + ".recv " + std::to_string(s.received));
        out.push_back("host." + n->path() + ".sent " + std::to_string(s.sent));
    }
}

void collect_dump_lines(const LpBuild& b, const DmsiDriver& driver,
                        std::vector<std::string>& out) {
    for (NetNode* n : b.local_nodes) {
        for (const NetNode::Interface& f : n->interfaces()) {
            out.push_back("mac." + f.full_path + " " + f.mac.to_string());
            out.push_back("addr." + f.full_path + " " + f.addr.to_string() + "/" +
                          std::to_string(f.prefix_len));
        }
        for (const std::string& line : n->routes().dump())
            out.push_back("route." + n->path() + " " + line);
    }
    for (const auto& [kind, token] : driver.final_tokens())
        out.push_back("dmsitoken." + kind + " " + hex16(fnv1a64(token.encode())));
}

struct TraceKey {
    std::int64_t ticks = 0;
    std::string target, sender;
    std::uint64_t seq = 0;

    auto operator<=>(const TraceKey&) const = default;
};

TraceKey parse_trace_key(const std::string& line) {
    std::istringstream ss(line);
    TraceKey k;
    std::string kind;
    if (!(ss >> k.ticks >> k.target >> kind >> k.sender >> k.seq))
        throw std::runtime_error("malformed trace line: " + line);
    return k;
}

std::uint64_t stat_value(const std::string& line) {
    std::size_t sp = line.rfind(' ');
    if (sp == std::string::npos) throw std::runtime_error("malformed stats line: " + line);
    return std::stoull(line.substr(sp + 1));
}

// Combines host lines from all LPs and appends the totals.
void write_stats_file(std::vector<std::string> host_lines, const std::string& path) {
    std::sort(host_lines.begin(), host_lines.end());
    std::uint64_t sent = 0, recv = 0, delay = 0;
    for (const std::string& l : host_lines) {
        std::uint64_t v = stat_value(l);
        if (l.find(".sent ") != std::string::npos) sent += v;
        else if (l.find(".recv ") != std::string::npos) recv += v;
        else delay += v;
    }
    host_lines.push_back("total.delay_sum_ps " + std::to_string(delay));
    host_lines.push_back("total.recv " + std::to_string(recv));
    host_lines.push_back("total.sent " + std::to_string(sent));
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const std::string& l : host_lines) out << l << "\n";
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<std::string> lines;
    std::string l;
    while (std::getline(in, l)) lines.push_back(l);
    return lines;
}

void write_report_file(const RunReport& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.6f", r.wall_seconds);
    out << "dmsi_hops " << r.dmsi_hops << "\n";
    out << "events " << r.events << "\n";
    for (std::size_t i = 0; i < r.lp_events.size(); ++i)
        out << "lp." << i << ".events " << r.lp_events[i] << "\n";
    out << "messages " << r.messages << "\n";
    out << "null_messages " << r.null_messages << "\n";
    out << "wall_seconds " << wall << "\n";
}

RunReport read_report_file(const std::string& path) {
    RunReport r;
    for (const std::string& l : read_lines(path)) {
        std::istringstream ss(l);
        std::string key;
        ss >> key;
        if (key == "dmsi_hops") ss >> r.dmsi_hops;
        else if (key == "events") ss >> r.events;
        else if (key == "messages") ss >> r.messages;
        else if (key == "null_messages") ss >> r.null_messages;
        else if (key == "wall_seconds") ss >> r.wall_seconds;
    }
    return r;
}

}  // namespace

std::uint64_t fnv1a64(const Bytes& b) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint8_t c : b) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string shard_name(const std::string& base, int lp) {
    return base + ".lp" + std::to_string(lp);
}

void write_sorted_lines(std::vector<std::string> lines, const std::string& path) {
    std::sort(lines.begin(), lines.end());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const std::string& l : lines) out << l << "\n";
}

WorkerResult run_lp_worker(const Topology& topo, const Scenario& scenario,
                           const PartitionMapping& mapping, int lp, Transport* transport,
                           const std::string& trace_path, bool init_only) {
    LpBuild b = build_partition_lp(topo, scenario, mapping, lp);
    std::unique_ptr<EnvelopeInbox> inbox;
    if (transport)
        inbox = std::make_unique<EnvelopeInbox>(
            *transport, std::chrono::milliseconds(1000LL * scenario.watchdog_seconds));

    DmsiDriver driver(*b.kernel, b.registry, inbox.get(), lp, mapping.n_lps);
    driver.run_all(kNumInitStages);

    WorkerResult r;
    r.dmsi_hops = driver.transport_hops();
    if (init_only) {
        collect_dump_lines(b, driver, r.dump_lines);
        // Peers may still be mid-barrier exchange; nothing further to sync.
        return r;
    }

    std::ofstream trace;
    if (!trace_path.empty()) {
        trace.open(trace_path);
        if (!trace) throw std::runtime_error("cannot write " + trace_path);
        b.kernel->set_trace(&trace);
    }

    LpRuntime runtime(*b.kernel, inbox.get(), lp, mapping.n_lps, b.in_links, b.out_links);
    r.run = runtime.run(SimTime::max());
    collect_stats_lines(b.local_nodes, r.stats_lines);
    return r;
}

void merge_trace_files(const std::vector<std::string>& shards, const std::string& out_path) {
    struct Shard {
        std::ifstream in;
        std::string line;
        TraceKey key;
        bool alive = false;
    };
    std::vector<Shard> s(shards.size());
    for (std::size_t i = 0; i < shards.size(); ++i) {
        s[i].in.open(shards[i]);
        if (!s[i].in) throw std::runtime_error("cannot read trace shard " + shards[i]);
        if (std::getline(s[i].in, s[i].line)) {
            s[i].key = parse_trace_key(s[i].line);
            s[i].alive = true;
        }
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    for (;;) {
        std::size_t best = s.size();
        for (std::size_t i = 0; i < s.size(); ++i)
            if (s[i].alive && (best == s.size() || s[i].key < s[best].key)) best = i;
        if (best == s.size()) break;
        out << s[best].line << "\n";
        if (std::getline(s[best].in, s[best].line))
            s[best].key = parse_trace_key(s[best].line);
        else
            s[best].alive = false;
    }
}

CompareResult compare_trace_files(const std::string& reference, const std::string& candidate) {
    std::ifstream a(reference), b(candidate);
    if (!a) throw std::runtime_error("cannot read " + reference);
    if (!b) throw std::runtime_error("cannot read " + candidate);
    CompareResult r;
    std::string la, lb;
    for (long n = 1;; ++n) {
        bool ga = static_cast<bool>(std::getline(a, la));
        bool gb = static_cast<bool>(std::getline(b, lb));
        if (!ga && !gb) return r;
        if (la != lb || ga != gb) {
            r.equal = false;
            r.line = n;
            r.expected = ga ? la : "<end of file>";
            r.actual = gb ? lb : "<end of file>";
            return r;
        }
    }
}

namespace {

RunReport finish_report(const std::vector<WorkerResult>& results, const RunOptions& opt,
                        double wall) {
    RunReport rep;
    rep.wall_seconds = wall;
    std::vector<std::string> host_lines, dump_lines;
    for (const WorkerResult& w : results) {
        rep.events += w.run.events_processed;
        rep.messages += w.run.messages_sent;
        rep.lp_events.push_back(w.run.events_processed);
        rep.null_messages += w.run.null_sent;
        rep.dmsi_hops += w.dmsi_hops;
        host_lines.insert(host_lines.end(), w.stats_lines.begin(), w.stats_lines.end());
        dump_lines.insert(dump_lines.end(), w.dump_lines.begin(), w.dump_lines.end());
    }
    if (!opt.stats_out.empty() && !opt.init_only) write_stats_file(host_lines, opt.stats_out);
    if (!opt.dump_out.empty() && opt.init_only) write_sorted_lines(dump_lines, opt.dump_out);
    return rep;
}

RunReport run_inproc(const Scenario& scenario, const Topology& topo,
                     const PartitionMapping& mapping, const RunOptions& opt) {
    auto wall0 = std::chrono::steady_clock::now();
    InProcHub hub(mapping.n_lps);
    std::vector<WorkerResult> results(static_cast<std::size_t>(mapping.n_lps));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(mapping.n_lps));
    std::vector<std::thread> threads;
    for (int lp = 0; lp < mapping.n_lps; ++lp) {
        threads.emplace_back([&, lp] {
            try {
                std::string shard =
                    opt.trace_out.empty() ? std::string() : shard_name(opt.trace_out, lp);
                results[static_cast<std::size_t>(lp)] = run_lp_worker(
                    topo, scenario, mapping, lp, &hub.endpoint(lp), shard, opt.init_only);
            } catch (...) {
                errors[static_cast<std::size_t>(lp)] = std::current_exception();
            }
        });
    }
    for (std::thread& t : threads) t.join();
    bool any_error = false;
    for (const std::exception_ptr& e : errors)
        if (e) {
            any_error = true;
            try { std::rethrow_exception(e); }
            catch (const std::exception& ex) { std::fprintf(stderr, "worker: %s\n", ex.what()); }
        }
    if (any_error) throw std::runtime_error("a worker thread failed");
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    if (!opt.trace_out.empty() && !opt.init_only) {
        std::vector<std::string> shards;
        for (int lp = 0; lp < mapping.n_lps; ++lp) shards.push_back(shard_name(opt.trace_out, lp));
        merge_trace_files(shards, opt.trace_out);
        for (const std::string& s : shards) std::remove(s.c_str());
    }
    return finish_report(results, opt, wall);
}

RunReport run_tcp_parent(const Scenario& scenario, const PartitionMapping& mapping,
                         const RunOptions& opt) {
    auto wall0 = std::chrono::steady_clock::now();
    if (opt.exe_path.empty())
        throw std::runtime_error("tcp mode requires the worker executable path");
    char tmpl[] = "/tmp/parsim.XXXXXX";
    if (!mkdtemp(tmpl)) throw std::runtime_error("mkdtemp failed");
    std::string dir = tmpl;
    std::string cfg = dir + "/scenario.cfg";
    write_config(scenario, cfg);

    std::vector<pid_t> pids;
    for (int lp = 0; lp < mapping.n_lps; ++lp) {
        std::vector<std::string> args = {opt.exe_path,
                                         "--config", cfg,
                                         "--lp-rank", std::to_string(lp),
                                         "--lps", std::to_string(mapping.n_lps),
                                         "--transport", "tcp",
                                         "--port-base", std::to_string(opt.port_base),
                                         "--report-out", shard_name(dir + "/report", lp)};
        if (!opt.trace_out.empty() && !opt.init_only) {
            args.push_back("--trace-out");
            args.push_back(shard_name(opt.trace_out, lp));
        }
        if (opt.init_only) {
            args.push_back("--init-only");
            args.push_back("--dump-out");
            args.push_back(shard_name(dir + "/dump", lp));
        }
        if (!opt.stats_out.empty() && !opt.init_only) {
            args.push_back("--stats-out");
            args.push_back(shard_name(dir + "/stats", lp));
        }
        pid_t pid = fork();
        if (pid < 0) throw std::runtime_error("fork failed");
        if (pid == 0) {
            std::vector<char*> argv;
            for (std::string& a : args) argv.push_back(a.data());
            argv.push_back(nullptr);
            execv(opt.exe_path.c_str(), argv.data());
            perror("execv");
            _exit(127);
        }
        pids.push_back(pid);
    }
    bool failed = false;
    for (std::size_t i = 0; i < pids.size(); ++i) {
        int status = 0;
        waitpid(pids[i], &status, 0);
        if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) failed = true;
    }
    if (failed) throw std::runtime_error("a worker process failed; see its stderr above");
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();

    RunReport rep;
    rep.wall_seconds = wall;
    std::vector<std::string> host_lines, dump_lines;
    for (int lp = 0; lp < mapping.n_lps; ++lp) {
        RunReport shard = read_report_file(shard_name(dir + "/report", lp));
        rep.events += shard.events;
        rep.messages += shard.messages;
        rep.lp_events.push_back(shard.events);
        rep.null_messages += shard.null_messages;
        rep.dmsi_hops += shard.dmsi_hops;
        if (opt.init_only) {
            auto lines = read_lines(shard_name(dir + "/dump", lp));
            dump_lines.insert(dump_lines.end(), lines.begin(), lines.end());
        } else if (!opt.stats_out.empty()) {
            auto lines = read_lines(shard_name(dir + "/stats", lp));
            host_lines.insert(host_lines.end(), lines.begin(), lines.end());
        }
    }
    if (!opt.trace_out.empty() && !opt.init_only) {
        std::vector<std::string> shards;
        for (int lp = 0; lp < mapping.n_lps; ++lp) shards.push_back(shard_name(opt.trace_out, lp));
        merge_trace_files(shards, opt.trace_out);
        for (const std::string& s : shards) std::remove(s.c_str());
    }
    if (!opt.stats_out.empty() && !opt.init_only) write_stats_file(host_lines, opt.stats_out);
    if (!opt.dump_out.empty() && opt.init_only) write_sorted_lines(dump_lines, opt.dump_out);

    std::remove((cfg + ".bb").c_str());
    std::remove(cfg.c_str());
    for (int lp = 0; lp < mapping.n_lps; ++lp) {
        std::remove(shard_name(dir + "/report", lp).c_str());
        std::remove(shard_name(dir + "/dump", lp).c_str());
        std::remove(shard_name(dir + "/stats", lp).c_str());
    }
    rmdir(dir.c_str());
    return rep;
}

}  // namespace

RunReport run_scenario(const Scenario& scenario, const RunOptions& opt) {
    Topology topo = generate_topology(scenario);
    PartitionMapping mapping = assign_partitions(scenario.n_lans, opt.n_lps);

    if (opt.mode == RunOptions::Mode::tcp) return run_tcp_parent(scenario, mapping, opt);
    if (opt.mode == RunOptions::Mode::inproc) return run_inproc(scenario, topo, mapping, opt);

    if (mapping.n_lps != 1)
        throw std::invalid_argument("sequential mode runs exactly one lp");
    auto wall0 = std::chrono::steady_clock::now();
    std::vector<WorkerResult> results(1);
    results[0] = run_lp_worker(topo, scenario, mapping, 0, nullptr,
                               opt.init_only ? std::string() : opt.trace_out, opt.init_only);
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    return finish_report(results, opt, wall);
}

int run_tcp_worker(const Scenario& scenario, int lp, int n_lps, int port_base,
                   const RunOptions& opt) {
    Topology topo = generate_topology(scenario);
    PartitionMapping mapping = assign_partitions(scenario.n_lans, n_lps);
    auto wall0 = std::chrono::steady_clock::now();
    TcpTransport transport(lp, n_lps, port_base);
    WorkerResult w =
        run_lp_worker(topo, scenario, mapping, lp, &transport, opt.trace_out, opt.init_only);
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();

    if (opt.init_only && !opt.dump_out.empty()) write_sorted_lines(w.dump_lines, opt.dump_out);
    if (!opt.init_only && !opt.stats_out.empty())
        write_sorted_lines(w.stats_lines, opt.stats_out);
    if (!opt.report_out.empty()) {
        RunReport rep;
        rep.wall_seconds = wall;
        rep.events = w.run.events_processed;
        rep.messages = w.run.messages_sent;
        rep.null_messages = w.run.null_sent;
        rep.dmsi_hops = w.dmsi_hops;
        write_report_file(rep, opt.report_out);
    }
    return 0;
}

}  // namespace parsim
