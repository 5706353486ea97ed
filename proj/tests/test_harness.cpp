#include <algorithm>

#include "doctest.h"
#include "mstsim/harness.hpp"

using namespace mstsim;

namespace {

std::vector<int> sorted_mst(const WeightedGraph& g) {
    auto m = kruskal_oracle(g);
    std::sort(m.begin(), m.end());
    return m;
}

// Runs a clean harness until every node verifies the oracle tree.
void settle(Simulator<HarnessProgram>& sim, const std::vector<int>& mst) {
    sim.run(400ull * sim.g.n() + 2000, [&](auto& s) { return legal(s.g, s.states, mst); });
    REQUIRE(legal(sim.g, sim.states, mst));
}

}  // namespace

TEST_CASE("clean start converges once and never resets") {
    for (int async = 0; async < 2; ++async) {
        auto g = generate_graph(GraphKind::RandomConnected, 24, 11);
        SelfstabConfig cfg;
        cfg.async = async != 0;
        auto v = run_selfstab(g, cfg);
        CHECK(v.converged);
        CHECK(v.resets == 0);
        CHECK(v.closure_breaks == 0);
    }
}

TEST_CASE("the construct phase yields the true n at every node") {
    auto g = generate_graph(GraphKind::RandomConnected, 16, 5);
    auto mst = sorted_mst(g);
    Simulator<HarnessProgram> sim(g, HarnessProgram{}, Scheduler{}, {}, TraceLevel::Off);
    settle(sim, mst);
    for (auto& s : sim.states) CHECK(s.vs.b.numk_n == 16);
}

TEST_CASE("one alarm on a path of 8 resets every node within 7 units") {
    auto g = generate_graph(GraphKind::Path, 8, 2);
    auto mst = sorted_mst(g);
    HarnessLog log;
    Simulator<HarnessProgram> sim(g, HarnessProgram{false, &log}, Scheduler{}, {}, TraceLevel::Off);
    settle(sim, mst);
    int end = 0;
    for (int v = 0; v < g.n(); ++v)
        if (g.degree(v) == 1) end = v;
    const auto e0 = sim.states[0].epoch;
    sim.states[end].vs.alarm = true;
    std::vector<std::uint64_t> at(g.n(), 0);
    sim.on_unit = [&](auto& s) {
        for (int v = 0; v < g.n(); ++v)
            if (!at[v] && s.states[v].epoch > e0) at[v] = s.time;
    };
    sim.run(sim.time + 20);
    REQUIRE(log.raises.size() == 1);
    const auto t0 = log.raises[0].first;
    for (int v = 0; v < g.n(); ++v) {
        CHECK(at[v] >= t0);
        CHECK(at[v] <= t0 + 7);
    }
}

TEST_CASE("two simultaneous alarms merge into one epoch") {
    auto g = generate_graph(GraphKind::RandomConnected, 20, 9);
    auto mst = sorted_mst(g);
    HarnessLog log;
    Simulator<HarnessProgram> sim(g, HarnessProgram{false, &log}, Scheduler{}, {}, TraceLevel::Off);
    settle(sim, mst);
    const auto e0 = sim.states[0].epoch;
    sim.states[2].vs.alarm = true;
    sim.states[17].vs.alarm = true;
    sim.run(sim.time + 400ull * g.n(), [&](auto& s) { return legal(s.g, s.states, mst); });
    CHECK(legal(g, sim.states, mst));
    CHECK(log.raises.size() == 2);
    CHECK(log.raises[0].second == log.raises[1].second);
    for (auto& s : sim.states) CHECK(s.epoch == e0 + 1);
}

TEST_CASE("a fault during construct restarts construction from round 0") {
    auto g = generate_graph(GraphKind::RandomConnected, 16, 3);
    auto mst = sorted_mst(g);
    HarnessLog log;
    Simulator<HarnessProgram> sim(g, HarnessProgram{false, &log}, Scheduler{}, {}, TraceLevel::Off);
    sim.run(200);
    REQUIRE(!sim.states[4].verify);
    sim.states[4].cur.alg.round += 3;
    sim.run(sim.time + 1);
    REQUIRE(log.raises.size() == 1);
    CHECK(sim.states[4].pulse == 0);
    CHECK(sim.states[4].cur.alg.round == 0);
    CHECK(sim.states[4].epoch == 1);
    sim.run(sim.time + 400ull * g.n(), [&](auto& s) { return legal(s.g, s.states, mst); });
    CHECK(legal(g, sim.states, mst));
}

TEST_CASE("a corrupted n claim is caught and repaired") {
    auto g = generate_graph(GraphKind::RandomConnected, 16, 8);
    auto mst = sorted_mst(g);
    Simulator<HarnessProgram> sim(g, HarnessProgram{}, Scheduler{}, {}, TraceLevel::Off);
    settle(sim, mst);
    auto t = sim.time;
    sim.states[6].vs.b.numk_n = 17;
    sim.run(t + 400ull * g.n(), [&](auto& s) { return s.time > t + 2 && legal(s.g, s.states, mst); });
    auto alarms = sim.trace.of_kind("alarm");
    REQUIRE(!alarms.empty());
    CHECK(alarms.front()->detail.find("numk") != std::string::npos);
    CHECK(legal(g, sim.states, mst));
    for (auto& s : sim.states) CHECK(s.vs.b.numk_n == 16);
}

TEST_CASE("randomized initial states converge to the oracle tree") {
    for (int async = 0; async < 2; ++async)
        for (std::uint64_t seed = 1; seed <= 4; ++seed) {
            auto g = generate_graph(GraphKind::RandomConnected, 20 + 7 * static_cast<int>(seed), seed);
            SelfstabConfig cfg;
            cfg.async = async != 0;
            cfg.seed = seed;
            cfg.randomize_init = true;
            auto v = run_selfstab(g, cfg);
            INFO("async=" << async << " seed=" << seed << " " << v.to_json());
            CHECK(v.converged);
            CHECK(v.closure_breaks == 0);
        }
}

TEST_CASE("a fault after stabilization is detected and repaired") {
    auto g = generate_graph(GraphKind::Grid, 25, 4);
    SelfstabConfig cfg;
    cfg.post_faults = 2;
    auto v = run_selfstab(g, cfg);
    CHECK(v.converged);
    CHECK(v.detection_times.size() == 2);
    CHECK(v.reconvergence_times.size() == 2);
}

TEST_CASE("scheduled faults from a fault list") {
    auto g = generate_graph(GraphKind::RandomConnected, 16, 21);
    SelfstabConfig cfg;
    cfg.faults = parse_faults("fault 30 " + std::to_string(g.ids[3]) + " randomize\n");
    auto v = run_selfstab(g, cfg);
    CHECK(v.converged);
}

TEST_CASE("verdict json has the documented keys") {
    Verdict v;
    auto j = v.to_json();
    for (auto k : {"converged", "convergence_time", "resets", "detection_times", "detection_distances", "peak_bits"})
        CHECK(j.find(std::string("\"") + k + "\"") != std::string::npos);
}
