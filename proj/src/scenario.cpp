#include "parsim/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace parsim {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& path, int line, const std::string& msg) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

std::uint64_t parse_rate(const std::string& text) {
    std::size_t pos = 0;
    double v = std::stod(text, &pos);
    std::string suffix = trim(text.substr(pos));
    double mult = 1;
    if (suffix == "k" || suffix == "kbps") mult = 1e3;
    else if (suffix == "M" || suffix == "Mbps") mult = 1e6;
    else if (suffix == "G" || suffix == "Gbps") mult = 1e9;
    else if (!suffix.empty() && suffix != "bps")
        throw std::invalid_argument("unknown rate suffix: " + suffix);
    if (v < 0) throw std::invalid_argument("negative rate");
    return static_cast<std::uint64_t>(v * mult);
}

SimTime parse_nonneg_duration(const std::string& v) {
    SimTime t = parse_duration(v);
    if (t < SimTime::zero()) throw std::invalid_argument("negative duration");
    return t;
}

}  // namespace

std::vector<std::pair<int, int>> builtin_backbone(int* n_nodes) {
    const int n = 57;
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    for (int i = 0; i < 29; ++i) edges.emplace_back(i, (i + 19) % n);
    if (n_nodes) *n_nodes = n;
    return edges;
}

std::vector<std::pair<int, int>> load_backbone_file(const std::string& path, int* n_nodes) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open backbone file: " + path);
    std::vector<std::pair<int, int>> edges;
    int max_node = -1;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::istringstream ss(t);
        int a, b;
        if (!(ss >> a >> b)) fail(path, lineno, "expected two node indices");
        if (a < 0 || b < 0 || a == b) fail(path, lineno, "bad edge");
        edges.emplace_back(a, b);
        max_node = std::max(max_node, std::max(a, b));
    }
    if (edges.empty()) throw std::runtime_error("backbone file has no edges: " + path);
    std::set<std::pair<int, int>> seen;
    for (auto [a, b] : edges) {
        auto e = std::minmax(a, b);
        if (!seen.insert(std::make_pair(e.first, e.second)).second)
            throw std::runtime_error("duplicate backbone edge in " + path);
    }
    if (n_nodes) *n_nodes = max_node + 1;
    return edges;
}

void finalize_scenario(Scenario& s) {
    if (s.backbone_edges.empty()) {
        if (s.backbone_file.empty())
            s.backbone_edges = builtin_backbone(&s.backbone_size);
        else
            s.backbone_edges = load_backbone_file(s.backbone_file, &s.backbone_size);
    }
    if (s.n_lans < 1) throw std::runtime_error("n_lans must be >= 1");
    if (s.n_lans > s.backbone_size)
        throw std::runtime_error("n_lans " + std::to_string(s.n_lans) +
                                 " exceeds backbone size " + std::to_string(s.backbone_size));
    if (s.p_local < 0 || s.p_local > 1) throw std::runtime_error("p_local must be in [0,1]");
    if (s.mean_size_bytes <= 0) throw std::runtime_error("mean_size must be > 0");
    if (s.mean_interarrival <= SimTime::zero())
        throw std::runtime_error("mean_interarrival must be > 0");
    if (s.gateway_delay < SimTime::zero() || s.intra_lan_delay < SimTime::zero() ||
        s.backbone_delay < SimTime::zero())
        throw std::runtime_error("link delays must be >= 0");
    if (s.sim_time < SimTime::zero()) throw std::runtime_error("sim_time must be >= 0");
}

void write_config(const Scenario& s, const std::string& path) {
    {
        std::ofstream bb(path + ".bb");
        if (!bb) throw std::runtime_error("cannot write " + path + ".bb");
        for (auto [a, b] : s.backbone_edges) bb << a << " " << b << "\n";
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    char num[64];
    auto dbl = [&](double v) {
        std::snprintf(num, sizeof num, "%.17g", v);
        return std::string(num);
    };
    out << "n_lans = " << s.n_lans << "\n";
    out << "seed = " << s.seed << "\n";
    out << "sim_time = " << s.sim_time.ticks() << "ps\n";
    out << "p_local = " << dbl(s.p_local) << "\n";
    out << "mean_size = " << dbl(s.mean_size_bytes) << "\n";
    out << "mean_interarrival = " << s.mean_interarrival.ticks() << "ps\n";
    out << "gateway_delay = " << s.gateway_delay.ticks() << "ps\n";
    out << "intra_lan_delay = " << s.intra_lan_delay.ticks() << "ps\n";
    out << "backbone_delay = " << s.backbone_delay.ticks() << "ps\n";
    out << "host_rate = " << s.host_rate_bps << "\n";
    out << "lan_rate = " << s.lan_rate_bps << "\n";
    out << "backbone_rate = " << s.backbone_rate_bps << "\n";
    out << "backbone_file = " << path << ".bb\n";
    out << "watchdog = " << s.watchdog_seconds << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

Scenario parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);

    Scenario s;
    bool have_n_lans = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t cut = line.find_first_of("#;");
        if (cut != std::string::npos) line = line.substr(0, cut);
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') fail(path, lineno, "unterminated section header");
            continue;  // sections are organizational only
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) fail(path, lineno, "expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty() || value.empty()) fail(path, lineno, "empty key or value");
        try {
            if (key == "n_lans") {
                s.n_lans = std::stoi(value);
                have_n_lans = true;
            } else if (key == "seed") {
                s.seed = std::stoull(value);
            } else if (key == "sim_time") {
                s.sim_time = parse_nonneg_duration(value);
            } else if (key == "p_local") {
                s.p_local = std::stod(value);
            } else if (key == "mean_size") {
                s.mean_size_bytes = std::stod(value);
            } else if (key == "mean_interarrival") {
                s.mean_interarrival = parse_nonneg_duration(value);
            } else if (key == "gateway_delay") {
                s.gateway_delay = parse_nonneg_duration(value);
            } else if (key == "intra_lan_delay") {
                s.intra_lan_delay = parse_nonneg_duration(value);
            } else if (key == "backbone_delay") {
                s.backbone_delay = parse_nonneg_duration(value);
            } else if (key == "host_rate") {
                s.host_rate_bps = parse_rate(value);
            } else if (key == "lan_rate") {
                s.lan_rate_bps = parse_rate(value);
            } else if (key == "backbone_rate") {
                s.backbone_rate_bps = parse_rate(value);
            } else if (key == "backbone_file") {
                s.backbone_file = value;
            } else if (key == "watchdog") {
                s.watchdog_seconds = std::stoi(value);
            } else {
                fail(path, lineno, "unknown key: " + key);
            }
        } catch (const std::runtime_error&) {
            throw;
        } catch (const std::exception& ex) {
            fail(path, lineno, "bad value for " + key + ": " + ex.what());
        }
    }
    if (!have_n_lans) throw std::runtime_error(path + ": missing required key n_lans");
    finalize_scenario(s);
    return s;
}

}  // namespace parsim
