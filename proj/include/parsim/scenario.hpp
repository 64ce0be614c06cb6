#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "parsim/time.hpp"

namespace parsim {

// Declarative description of a benchmark run: backbone + per-router campus
// LANs, link parameter classes, traffic model, horizon, seed. Together with
// the seed this fully determines every observable result.
struct Scenario {
    int n_lans = 0;
    std::uint64_t seed = 1;
    SimTime sim_time = SimTime::from_ms(10);  // traffic generation horizon
    double p_local = 0.5;
    double mean_size_bytes = 200.0;
    SimTime mean_interarrival = SimTime::from_us(20);

    SimTime gateway_delay = SimTime::from_us(10);   // LAN <-> backbone, swept
    SimTime intra_lan_delay = SimTime::from_us(100);
    SimTime backbone_delay = SimTime::from_us(100);

    std::uint64_t host_rate_bps = 1'000'000'000;        // host <-> access router
    std::uint64_t lan_rate_bps = 10'000'000'000;        // LAN routers, gateway
    std::uint64_t backbone_rate_bps = 100'000'000'000;  // backbone internal

    std::string backbone_file;  // empty = built-in 57-node graph
    std::vector<std::pair<int, int>> backbone_edges;
    int backbone_size = 0;

    int watchdog_seconds = 60;
};

// Parses the flat `key = value` config format ([section] headers allowed,
// `#`/`;` comments). Unknown keys and malformed values are rejected with the
// offending line number. Loads the backbone adjacency as well.
Scenario parse_config(const std::string& path);

// Applies defaults and validates a scenario assembled in code.
void finalize_scenario(Scenario& s);

// The shipped 57-node backbone substitute: a ring plus deterministic chords,
// average degree about 3. Swappable via backbone_file.
std::vector<std::pair<int, int>> builtin_backbone(int* n_nodes);

std::vector<std::pair<int, int>> load_backbone_file(const std::string& path, int* n_nodes);

// Writes a config file (plus `<path>.bb` with the resolved backbone edges)
// that parse_config reads back to an identical scenario. Used to hand the
// exact scenario to spawned worker processes.
void write_config(const Scenario& s, const std::string& path);

}  // namespace parsim
