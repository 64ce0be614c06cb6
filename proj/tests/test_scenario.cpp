#include <unistd.h>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>

#include "doctest.h"
#include "parsim/scenario.hpp"

using namespace parsim;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& text) {
        char buf[] = "/tmp/parsim_cfg_XXXXXX";
        int fd = mkstemp(buf);
        REQUIRE(fd >= 0);
        close(fd);
        path = buf;
        std::ofstream(path) << text;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("minimal config fills documented defaults") {
    TempFile f("n_lans = 2\ngateway_delay = 10us\n");
    Scenario s = parse_config(f.path);
    CHECK(s.n_lans == 2);
    CHECK(s.seed == 1);
    CHECK(s.sim_time == SimTime::from_ms(10));
    CHECK(s.p_local == 0.5);
    CHECK(s.mean_size_bytes == 200.0);
    CHECK(s.mean_interarrival == SimTime::from_us(20));
    CHECK(s.gateway_delay == SimTime::from_us(10));
    CHECK(s.intra_lan_delay == SimTime::from_us(100));
    CHECK(s.backbone_delay == SimTime::from_us(100));
    CHECK(s.host_rate_bps == 1'000'000'000);
    CHECK(s.lan_rate_bps == 10'000'000'000);
    CHECK(s.backbone_rate_bps == 100'000'000'000);
    CHECK(s.backbone_size == 57);
}

TEST_CASE("sections and comments are accepted, junk is rejected with line info") {
    TempFile ok("[general]\nn_lans = 3  # trailing comment\n; full comment\nseed = 9\n");
    Scenario s = parse_config(ok.path);
    CHECK(s.n_lans == 3);
    CHECK(s.seed == 9);

    TempFile unknown("n_lans = 2\nwarp_factor = 9\n");
    CHECK_THROWS_WITH_AS(parse_config(unknown.path), doctest::Contains(":2:"),
                         std::runtime_error);
    TempFile noeq("n_lans = 2\nnonsense\n");
    CHECK_THROWS(parse_config(noeq.path));
    TempFile badval("n_lans = 2\nsim_time = soon\n");
    CHECK_THROWS_WITH_AS(parse_config(badval.path), doctest::Contains("sim_time"),
                         std::runtime_error);
    TempFile nolans("seed = 4\n");
    CHECK_THROWS_WITH_AS(parse_config(nolans.path), doctest::Contains("n_lans"),
                         std::runtime_error);
}

TEST_CASE("delay bounds: 5 ms gateway accepted, negatives rejected") {
    TempFile big("n_lans = 2\ngateway_delay = 5ms\n");
    CHECK(parse_config(big.path).gateway_delay == SimTime::from_ms(5));
    TempFile neg("n_lans = 2\ngateway_delay = -1us\n");
    CHECK_THROWS(parse_config(neg.path));
    Scenario s;
    s.n_lans = 1;
    s.mean_interarrival = SimTime::zero();
    CHECK_THROWS(finalize_scenario(s));
    Scenario p;
    p.n_lans = 1;
    p.p_local = 1.5;
    CHECK_THROWS(finalize_scenario(p));
    Scenario z;
    z.n_lans = 0;
    CHECK_THROWS(finalize_scenario(z));
}

TEST_CASE("builtin backbone: 57 nodes, ring plus chords, average degree about 3") {
    int n = 0;
    auto edges = builtin_backbone(&n);
    CHECK(n == 57);
    CHECK(edges.size() == 86);  // 57 ring + 29 chords
    std::set<std::pair<int, int>> seen;
    std::vector<int> degree(57, 0);
    for (auto [a, b] : edges) {
        CHECK(a != b);
        CHECK(a >= 0);
        CHECK(b < 57);
        auto key = std::minmax(a, b);
        CHECK(seen.insert({key.first, key.second}).second);  // no duplicate edges
        ++degree[a];
        ++degree[b];
    }
    double avg = 2.0 * edges.size() / 57;
    CHECK(avg > 2.5);
    CHECK(avg < 3.5);
}

TEST_CASE("backbone files: load, validate, and n_lans bound") {
    TempFile bb("# two nodes\n0 1\n");
    int n = 0;
    auto edges = load_backbone_file(bb.path, &n);
    CHECK(n == 2);
    CHECK(edges.size() == 1);

    TempFile dup("0 1\n1 0\n");
    CHECK_THROWS_WITH_AS(load_backbone_file(dup.path, &n), doctest::Contains("duplicate"),
                         std::runtime_error);
    TempFile self("0 0\n");
    CHECK_THROWS(load_backbone_file(self.path, &n));

    TempFile cfg("n_lans = 5\nbackbone_file = " + bb.path + "\n");
    CHECK_THROWS_WITH_AS(parse_config(cfg.path), doctest::Contains("exceeds"),
                         std::runtime_error);
}

TEST_CASE("write_config round-trips a scenario exactly") {
    Scenario s;
    s.n_lans = 4;
    s.seed = 1234;
    s.sim_time = parse_duration("730us");
    s.p_local = 0.9;
    s.mean_size_bytes = 123.75;
    s.gateway_delay = SimTime::from_ns(10);
    finalize_scenario(s);

    char buf[] = "/tmp/parsim_rt_XXXXXX";
    int fd = mkstemp(buf);
    REQUIRE(fd >= 0);
    close(fd);
    write_config(s, buf);
    Scenario back = parse_config(buf);
    CHECK(back.n_lans == s.n_lans);
    CHECK(back.seed == s.seed);
    CHECK(back.sim_time == s.sim_time);
    CHECK(back.p_local == s.p_local);
    CHECK(back.mean_size_bytes == s.mean_size_bytes);
    CHECK(back.gateway_delay == s.gateway_delay);
    CHECK(back.backbone_edges == s.backbone_edges);
    std::remove(buf);
    std::remove((std::string(buf) + ".bb").c_str());
}
