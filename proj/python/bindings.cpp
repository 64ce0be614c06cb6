#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "parsim/harness.hpp"
#include "parsim/partition.hpp"
#include "parsim/scenario.hpp"
#include "parsim/time.hpp"
#include "parsim/topology.hpp"

namespace py = pybind11;

namespace {

py::dict run(const std::string& config, int lps, const std::string& mode,
             const std::string& trace_out, const std::string& stats_out, bool init_only,
             const std::string& dump_out, std::optional<std::uint64_t> seed,
             std::optional<std::string> sim_time) {
    parsim::Scenario s = parsim::parse_config(config);
    if (seed) s.seed = *seed;
    if (sim_time) s.sim_time = parsim::parse_duration(*sim_time);

    parsim::RunOptions opt;
    opt.n_lps = lps;
    if (mode == "sequential") opt.mode = parsim::RunOptions::Mode::solo;
    else if (mode == "inproc") opt.mode = parsim::RunOptions::Mode::inproc;
    else throw std::invalid_argument("mode must be 'sequential' or 'inproc'");
    opt.trace_out = trace_out;
    opt.stats_out = stats_out;
    opt.init_only = init_only;
    opt.dump_out = dump_out;

    parsim::RunReport rep = parsim::run_scenario(s, opt);
    py::dict d;
    d["events"] = rep.events;
    d["messages"] = rep.messages;
    d["null_messages"] = rep.null_messages;
    d["dmsi_hops"] = rep.dmsi_hops;
    d["lp_events"] = rep.lp_events;
    d["wall_seconds"] = rep.wall_seconds;
    return d;
}

py::dict compare(const std::string& reference, const std::string& candidate) {
    parsim::CompareResult r = parsim::compare_trace_files(reference, candidate);
    py::dict d;
    d["equal"] = r.equal;
    d["line"] = r.line;
    d["expected"] = r.expected;
    d["actual"] = r.actual;
    return d;
}

py::dict topology_info(const std::string& config) {
    parsim::Scenario s = parsim::parse_config(config);
    parsim::Topology t = parsim::generate_topology(s);
    py::dict d;
    d["nodes"] = t.nodes.size();
    d["links"] = t.links.size();
    d["interfaces"] = t.interfaces.size();
    return d;
}

}  // namespace

PYBIND11_MODULE(_parsim, m) {
    m.doc() = "conservative parallel network simulator";
    m.def("run", &run, py::arg("config"), py::arg("lps") = 1, py::arg("mode") = "sequential",
          py::arg("trace_out") = "", py::arg("stats_out") = "", py::arg("init_only") = false,
          py::arg("dump_out") = "", py::arg("seed") = std::nullopt,
          py::arg("sim_time") = std::nullopt);
    m.def("merge_traces", &parsim::merge_trace_files, py::arg("shards"), py::arg("out"));
    m.def("compare_traces", &compare, py::arg("reference"), py::arg("candidate"));
    m.def("topology_info", &topology_info, py::arg("config"));
    m.def("parse_duration",
          [](const std::string& text) { return parsim::parse_duration(text).ticks(); },
          py::arg("text"));
    m.def("partition_of", [](int n_lans, int n_lps) {
        return parsim::assign_partitions(n_lans, n_lps).group_to_lp;
    });
}
