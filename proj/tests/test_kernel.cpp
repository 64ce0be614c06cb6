#include <algorithm>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "parsim/kernel.hpp"
#include "parsim/rng.hpp"

using namespace parsim;

namespace {

// Minimal module recording what it saw.
struct Probe : SimModule {
    std::vector<Event> seen;
    std::vector<std::pair<int, int>> inits;  // (stage, order index)
    static inline int init_counter = 0;
    int stages = 1;

    int num_init_stages() const override { return stages; }
    void init(int stage) override { inits.emplace_back(stage, init_counter++); }
    void handle(const Event& e) override { seen.push_back(e); }
};

PathTable two_paths() { return PathTable({"a", "b"}); }

}  // namespace

TEST_CASE("order key: time, then target, sender, sender_seq") {
    OrderKey base{100, 2, 3, 5};
    CHECK(base < OrderKey{101, 0, 0, 0});
    CHECK(OrderKey{100, 1, 9, 9} < base);
    CHECK(OrderKey{100, 2, 2, 9} < base);
    CHECK((OrderKey{100, 2, 3, 2} < OrderKey{100, 2, 3, 9}));  // seq 2 pops first
    CHECK(base == OrderKey{100, 2, 3, 5});
}

TEST_CASE("FES pops in total-key order (random events vs sort oracle)") {
    Kernel k(two_paths());
    auto& m = static_cast<Probe&>(k.add_module(std::make_unique<Probe>(), "a"));
    std::mt19937_64 gen(7);
    std::vector<Event> oracle;
    for (int i = 0; i < 500; ++i) {
        Message msg;
        msg.kind = MsgKind::control;
        SimTime t(static_cast<std::int64_t>(gen() % 50));  // many ties
        k.schedule_self(m, t, msg);
    }
    // Drain and compare against a stable-sorted oracle of the same keys.
    std::vector<Event> popped;
    while (k.has_event()) popped.push_back(k.pop_min());
    REQUIRE(popped.size() == 500);
    oracle = popped;
    std::shuffle(oracle.begin(), oracle.end(), gen);
    std::sort(oracle.begin(), oracle.end(),
              [](const Event& x, const Event& y) { return x.key() < y.key(); });
    for (std::size_t i = 0; i < popped.size(); ++i) CHECK(popped[i].key() == oracle[i].key());
    CHECK_THROWS(k.pop_min());  // exhausted
    CHECK_THROWS(k.peek());
}

TEST_CASE("transmission time: ceil(8*bytes/rate) in ps") {
    CHECK(transmission_time(200, 1'000'000'000).ticks() == 1'600'000);  // 1.6 us
    CHECK(transmission_time(200, 0).ticks() == 0);                      // unlimited
    CHECK(transmission_time(1, 3).ticks() == 2'666'666'666'667);        // ceil
}

TEST_CASE("send_via_gate: delay + serialization") {
    Kernel k(two_paths());
    auto& a = static_cast<Probe&>(k.add_module(std::make_unique<Probe>(), "a"));
    k.add_module(std::make_unique<Probe>(), "b");
    int ch = k.add_channel("a", "b", SimTime::from_us(100), 1'000'000'000);

    Message msg;
    msg.kind = MsgKind::frame;
    msg.byte_length = 200;
    SUBCASE("200 B over 100 us at 1 Gb/s arrives at now + 101.6 us") {
        CHECK(k.send_via_gate(a, ch, msg).ticks() == 101'600'000);
    }
    SUBCASE("back-to-back frames serialize on the channel") {
        CHECK(k.send_via_gate(a, ch, msg).ticks() == 101'600'000);
        // Second frame starts when the first leaves the wire.
        CHECK(k.send_via_gate(a, ch, msg).ticks() == 103'200'000);
    }
    SUBCASE("zero delay, unlimited rate arrives now") {
        int fast = k.add_channel("a", "b", SimTime::zero(), 0);
        CHECK(k.send_via_gate(a, fast, msg).ticks() == 0);
    }
    SUBCASE("a gate belongs to its source module") {
        auto& b = static_cast<Probe&>(*k.find_module(k.paths().id_of("b")));
        CHECK_THROWS(k.send_via_gate(b, ch, msg));
    }
}

TEST_CASE("run processes up to t_end and keeps the clock monotone") {
    Kernel k(two_paths());
    auto& a = static_cast<Probe&>(k.add_module(std::make_unique<Probe>(), "a"));
    SUBCASE("empty FES returns immediately") {
        RunStats s = k.run(SimTime::from_ms(10));
        CHECK(s.events_processed == 0);
    }
    SUBCASE("single event at t=5") {
        Message msg;
        k.schedule_self(a, SimTime(5), msg);
        RunStats s = k.run(SimTime(10));
        CHECK(s.events_processed == 1);
        CHECK(k.now().ticks() == 5);
    }
    SUBCASE("events beyond t_end stay queued") {
        Message msg;
        k.schedule_self(a, SimTime(5), msg);
        k.schedule_self(a, SimTime(50), msg);
        CHECK(k.run(SimTime(10)).events_processed == 1);
        CHECK(k.has_event());
    }
    SUBCASE("scheduling into the past is fatal") {
        Message msg;
        k.schedule_self(a, SimTime(5), msg);
        k.run(SimTime(10));
        CHECK_THROWS(k.schedule_self(a, SimTime(1), msg));
    }
}

TEST_CASE("init_all runs every stage s before any stage s+1, modules in path order") {
    Kernel k(PathTable({"m.a", "m.b", "m.c"}));
    Probe::init_counter = 0;
    auto mk = [&](const std::string& p) -> Probe& {
        auto probe = std::make_unique<Probe>();
        probe->stages = 2;
        return static_cast<Probe&>(k.add_module(std::move(probe), p));
    };
    // Insertion order deliberately differs from path order.
    Probe& c = mk("m.c");
    Probe& a = mk("m.a");
    Probe& b = mk("m.b");
    k.init_all(2);
    REQUIRE(a.inits.size() == 2);
    // Stage 0 everywhere first (order a,b,c), then stage 1.
    CHECK(a.inits[0] == std::pair<int, int>{0, 0});
    CHECK(b.inits[0] == std::pair<int, int>{0, 1});
    CHECK(c.inits[0] == std::pair<int, int>{0, 2});
    CHECK(a.inits[1] == std::pair<int, int>{1, 3});
    CHECK(c.inits[1] == std::pair<int, int>{1, 5});

    Probe extra;
    extra.stages = 3;
    CHECK_THROWS(k.add_module(std::make_unique<Probe>(), "m.a"));  // duplicate path
}

TEST_CASE("trace line format: ticks target kind sender seq") {
    Kernel k(two_paths());
    auto& a = static_cast<Probe&>(k.add_module(std::make_unique<Probe>(), "a"));
    std::ostringstream os;
    k.set_trace(&os);
    Message msg;
    msg.kind = MsgKind::app_payload;
    k.schedule_self(a, SimTime(1234), msg);
    k.run(SimTime::max());
    CHECK(os.str() == "1234 a app-payload a 0\n");
}
