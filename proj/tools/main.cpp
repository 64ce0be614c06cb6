#include <unistd.h>

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "parsim/harness.hpp"
#include "parsim/scenario.hpp"
#include "parsim/time.hpp"

namespace {

int do_compare(const std::string& reference, const std::string& candidate) {
    parsim::CompareResult r = parsim::compare_trace_files(reference, candidate);
    if (r.equal) {
        std::cout << "traces identical\n";
        return 0;
    }
    std::cout << "traces differ at line " << r.line << "\n";
    std::cout << "  reference: " << r.expected << "\n";
    std::cout << "  candidate: " << r.actual << "\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"parsim: conservative parallel network simulator"};

    std::string config, trace_out, stats_out, dump_out, report_out;
    std::string compare_ref, baseline, transport = "inproc";
    std::vector<std::string> merge_shards;
    std::string seed_override, sim_time_override;
    bool sequential = false, init_only = false;
    int lps = 1, repeat = 1, port_base = 19000, lp_rank = -1;

    app.add_option("--config", config, "scenario config file");
    app.add_flag("--sequential", sequential, "single sequential kernel, no transport");
    app.add_option("--lps", lps, "number of logical processes");
    app.add_option("--transport", transport, "inproc|tcp")
        ->check(CLI::IsMember({"inproc", "tcp"}));
    app.add_option("--seed", seed_override, "override the scenario seed");
    app.add_option("--sim-time", sim_time_override, "override the traffic horizon, e.g. 5ms");
    app.add_option("--trace-out", trace_out, "write the merged event trace here");
    app.add_option("--stats-out", stats_out, "write per-host statistics here");
    app.add_flag("--init-only", init_only, "initialize, dump state, skip the event phase");
    app.add_option("--dump-out", dump_out, "write the init dump (MACs, addresses, routes)");
    app.add_option("--report-out", report_out, "write the run report here");
    app.add_option("--compare", compare_ref, "compare a trace against this reference");
    app.add_option("--merge", merge_shards, "merge these trace shards into --trace-out");
    app.add_option("--baseline", baseline, "report file of a reference run, for speedup");
    app.add_option("--repeat", repeat, "run this many times, keep the fastest wall time");
    app.add_option("--port-base", port_base, "first TCP port of the mesh")->group("");
    app.add_option("--lp-rank", lp_rank, "run as one spawned tcp worker")->group("");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!merge_shards.empty()) {
            if (trace_out.empty()) {
                std::cerr << "--merge requires --trace-out\n";
                return 2;
            }
            if (!config.empty()) {
                std::cerr << "--merge cannot be combined with a simulation run\n";
                return 2;
            }
            parsim::merge_trace_files(merge_shards, trace_out);
            if (!compare_ref.empty()) return do_compare(compare_ref, trace_out);
            return 0;
        }

        if (config.empty() && !compare_ref.empty()) {
            // Compare-only: candidate trace given via --trace-out.
            if (trace_out.empty()) {
                std::cerr << "--compare without a run requires --trace-out\n";
                return 2;
            }
            return do_compare(compare_ref, trace_out);
        }

        if (config.empty()) {
            std::cerr << "missing --config (see --help)\n";
            return 2;
        }
        if (sequential && (lps != 1 || app.count("--transport"))) {
            std::cerr << "--sequential conflicts with --lps/--transport\n";
            return 2;
        }

        parsim::Scenario scenario = parsim::parse_config(config);
        if (!seed_override.empty()) scenario.seed = std::stoull(seed_override);
        if (!sim_time_override.empty())
            scenario.sim_time = parsim::parse_duration(sim_time_override);

        parsim::RunOptions opt;
        opt.n_lps = lps;
        opt.trace_out = trace_out;
        opt.stats_out = stats_out;
        opt.init_only = init_only;
        opt.dump_out = dump_out;
        opt.port_base = port_base;
        opt.report_out = report_out;

        if (lp_rank >= 0) {
            // Spawned tcp worker: file options already name this LP's shards.
            return parsim::run_tcp_worker(scenario, lp_rank, lps, port_base, opt);
        }

        if (sequential)
            opt.mode = parsim::RunOptions::Mode::solo;
        else if (transport == "tcp")
            opt.mode = parsim::RunOptions::Mode::tcp;
        else
            opt.mode = parsim::RunOptions::Mode::inproc;
        if (opt.mode == parsim::RunOptions::Mode::tcp) {
            char buf[4096];
            ssize_t n = readlink("/proc/self/exe", buf, sizeof buf - 1);
            if (n <= 0) throw std::runtime_error("cannot resolve own executable path");
            buf[n] = 0;
            opt.exe_path = buf;
        }

        parsim::RunReport best;
        for (int i = 0; i < repeat; ++i) {
            parsim::RunReport rep = parsim::run_scenario(scenario, opt);
            if (i == 0 || rep.wall_seconds < best.wall_seconds) best = rep;
        }

        std::cout << "dmsi_hops " << best.dmsi_hops << "\n";
        std::cout << "events " << best.events << "\n";
        for (std::size_t i = 0; i < best.lp_events.size(); ++i)
            std::cout << "lp." << i << ".events " << best.lp_events[i] << "\n";
        std::cout << "messages " << best.messages << "\n";
        std::cout << "null_messages " << best.null_messages << "\n";
        std::printf("wall_seconds %.6f\n", best.wall_seconds);
        if (!baseline.empty()) {
            double base_wall = 0;
            {
                std::ifstream in(baseline);
                if (!in) throw std::runtime_error("cannot read baseline report " + baseline);
                std::string key;
                double v;
                while (in >> key >> v)
                    if (key == "wall_seconds") base_wall = v;
            }
            if (base_wall <= 0) throw std::runtime_error("baseline has no wall_seconds");
            std::printf("speedup %.3f\n", base_wall / best.wall_seconds);
        }
        if (!report_out.empty()) {
            std::ofstream out(report_out);
            out << "events " << best.events << "\n";
            out << "null_messages " << best.null_messages << "\n";
            char w[32];
            std::snprintf(w, sizeof w, "%.6f", best.wall_seconds);
            out << "wall_seconds " << w << "\n";
        }
        if (!compare_ref.empty()) {
            if (trace_out.empty()) {
                std::cerr << "--compare needs --trace-out to know what to compare\n";
                return 2;
            }
            return do_compare(compare_ref, trace_out);
        }
        return 0;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}
