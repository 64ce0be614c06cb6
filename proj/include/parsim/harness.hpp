#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "parsim/partition.hpp"
#include "parsim/scenario.hpp"
#include "parsim/transport.hpp"

namespace parsim {

struct RunOptions {
    enum class Mode { solo, inproc, tcp };
    Mode mode = Mode::solo;
    int n_lps = 1;
    std::string trace_out;   // empty = no trace
    std::string stats_out;   // empty = no stats file
    bool init_only = false;
    std::string dump_out;    // init dump (addresses, MACs, routes); init_only runs
    std::string exe_path;    // tcp: worker binary to spawn
    int port_base = 19000;   // tcp
    std::string report_out;  // tcp worker: per-LP run report shard
};

struct RunReport {
    double wall_seconds = 0;
    std::uint64_t events = 0;
    std::uint64_t messages = 0;
    std::vector<std::uint64_t> lp_events;
    std::uint64_t null_messages = 0;
    std::uint64_t dmsi_hops = 0;
};

// Result of one LP's share of a run, in-memory form.
struct WorkerResult {
    LpRunStats run;
    std::uint64_t dmsi_hops = 0;
    std::vector<std::string> stats_lines;  // "host.<path>.{sent,recv,delay_sum_ps} <v>"
    std::vector<std::string> dump_lines;   // "mac./addr./route./dmsitoken. ..." lines
};

// Runs one LP end to end: build, DMSI init, event phase (skipped for
// init-only runs). transport is null exactly when the run is sequential.
WorkerResult run_lp_worker(const Topology& topo, const Scenario& scenario,
                           const PartitionMapping& mapping, int lp, Transport* transport,
                           const std::string& trace_path, bool init_only);

// Full run in the chosen mode; merges per-LP outputs into the files named in
// the options. tcp mode spawns one worker process per LP.
RunReport run_scenario(const Scenario& scenario, const RunOptions& opt);

// Entry point for a spawned tcp worker (hidden CLI flags); writes
// trace/stats/dump/report shards and returns a process exit code.
int run_tcp_worker(const Scenario& scenario, int lp, int n_lps, int port_base,
                   const RunOptions& opt);

// Shard file names used by tcp mode.
std::string shard_name(const std::string& base, int lp);

// Merges per-LP trace shards (each internally ordered) into one totally
// ordered trace by the (time, target, sender, seq) key.
void merge_trace_files(const std::vector<std::string>& shards, const std::string& out);

struct CompareResult {
    bool equal = true;
    long line = 0;  // first differing line, 1-based
    std::string expected, actual;
};

CompareResult compare_trace_files(const std::string& reference, const std::string& candidate);

// Writes `lines` sorted, one per line.
void write_sorted_lines(std::vector<std::string> lines, const std::string& path);

// 64-bit FNV-1a, used to fingerprint init tokens in dumps.
std::uint64_t fnv1a64(const Bytes& b);

}  // namespace parsim
