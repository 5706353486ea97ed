#include <cmath>
#include <map>

#include "doctest.h"
#include "mstsim/verifier.hpp"

using namespace mstsim;

namespace {

Info piece(NodeId z, int lev, Weight w) { return Info{true, z, static_cast<std::uint32_t>(lev), w}; }

// Feeds cars (epoch, level or -1 for a header) to the Top monitor of a node with J = {0, 2, 5}.
Alarm feed(const std::vector<std::pair<int, int>>& cars) {
    WeightedGraph g;
    g.add_node(1);
    Dims dims = Dims::of(g);
    Trace tr;
    tr.level = TraceLevel::Off;
    VerifyState s;
    s.b.roots = "0*0**0";
    s.b.jdelim = 0;
    auto tm = train_timing(64, false);
    std::uint64_t t = 0;
    for (auto [e, lev] : cars) {
        StepCtx ctx{g, 0, 1, ++t, dims, tr};
        VerifyState o = s;
        o.tr[0].bx.e = static_cast<std::uint8_t>(e);
        o.tr[0].bx.x = lev < 0 ? Info{} : piece(7, lev, 3);
        monitor_step(ctx, 0, s, o, true, tm);
        s = o;
        if (s.alarm) break;
    }
    return s.code;
}

std::vector<std::pair<int, int>> cycle(int e, std::vector<int> levs) {
    std::vector<std::pair<int, int>> out{{e, -1}};
    for (int j : levs) out.push_back({e, j});
    return out;
}

std::vector<std::pair<int, int>> cat(std::initializer_list<std::vector<std::pair<int, int>>> xs) {
    std::vector<std::pair<int, int>> out;
    for (auto& x : xs) out.insert(out.end(), x.begin(), x.end());
    return out;
}

}  // namespace

TEST_CASE("cycle set monitor") {
    CHECK(feed(cat({cycle(1, {0, 2, 5}), cycle(2, {0, 2, 5}), cycle(3, {0, 2, 5}), cycle(0, {})})) == Alarm::None);
    CHECK(feed(cat({cycle(1, {0, 2, 5}), cycle(2, {0, 5}), cycle(3, {})})) == Alarm::CycleSet);
    CHECK(feed(cat({cycle(1, {0, 2, 5}), cycle(2, {0, 2, 2, 5})})) == Alarm::CycleSet);
    // a missing top level shows at the next boundary
    CHECK(feed(cat({cycle(1, {0, 2, 5}), cycle(2, {0, 2}), cycle(3, {})})) == Alarm::CycleSet);
    // the first partial cycle is not judged
    CHECK(feed(cat({cycle(1, {5}), cycle(2, {0, 2, 5}), cycle(3, {})})) == Alarm::None);
}

namespace {

struct Pair {
    WeightedGraph g;
    Dims dims;
    Trace tr;
    Pair() {
        g.add_node(1);
        g.add_node(2);
        g.add_edge(0, 1, 7);
        dims = Dims::of(g);
        tr.level = TraceLevel::Off;
    }
    StepCtx ctx() { return StepCtx{g, 0, 1, 1, dims, tr}; }
};

}  // namespace

TEST_CASE("parent agreement") {
    Pair P;
    auto ctx = P.ctx();
    Info mine = piece(5, 1, 9);
    Info same = mine, off = mine;
    off.w ^= 1;
    CHECK(edge_check(ctx, 1, '0', 0, mine, 1, &same) == Alarm::None);
    CHECK(edge_check(ctx, 1, '0', 0, mine, 1, &off) == Alarm::ParentMismatch);
    // a fragment root does not compare with its parent
    Info other = piece(6, 1, 9);
    CHECK(edge_check(ctx, 1, '1', 0, piece(1, 1, 5), 1, &other) == Alarm::None);
}

TEST_CASE("C1 and C2") {
    Pair P;
    auto ctx = P.ctx();
    Info theirs = piece(2, 0, 7);
    CHECK(edge_check(ctx, 0, '1', 1, piece(1, 0, 7), 1, &theirs) == Alarm::None);
    CHECK(edge_check(ctx, 0, '1', 1, piece(1, 0, 6), 1, &theirs) == Alarm::C1);
    Info inside = piece(1, 0, 7);
    CHECK(edge_check(ctx, 0, '1', 1, piece(1, 0, 7), 1, &inside) == Alarm::C1);
    // not the candidate: a lighter edge leaving the fragment is C2
    CHECK(edge_check(ctx, 0, '1', 0, piece(1, 0, 9), 1, &theirs) == Alarm::C2);
    CHECK(edge_check(ctx, 0, '1', 0, piece(1, 0, 5), 1, &theirs) == Alarm::None);
    // neighbour without a level-j fragment is a different fragment
    CHECK(edge_check(ctx, 0, '1', 0, piece(1, 0, 9), 1, nullptr) == Alarm::C2);
}

TEST_CASE("root id is checked when the piece is loaded") {
    Pair P;
    VerifyState s;
    s.b.roots = "1";
    s.b.jdelim = 0;
    s.b.toproot = 1;
    auto tm = train_timing(2, false);
    VerifyState nbr = s;
    auto get = [&](int) -> const VerifyState& { return nbr; };
    for (NodeId z : {NodeId{1}, NodeId{999}}) {
        VerifyState o = s;
        o.tr[0].bx.x = piece(z, 0, kInfWeight);
        compare_step(P.ctx(), s, VNbrs::of(get), o, tm, {});
        CHECK(o.code == (z == 1 ? Alarm::None : Alarm::RootId));
    }
}

TEST_CASE("registers outside their range raise budget") {
    auto g = generate_graph(GraphKind::RandomConnected, 24, 3);
    auto c = certify(g);
    auto st = verifier_start(g, c.tree, c.bundles);
    st[5].tr[1].ph = 7;
    Simulator<VerifierProgram> sim(g, VerifierProgram{st, {}}, Scheduler{}, {}, TraceLevel::Off);
    sim.run(1);
    CHECK(sim.states[5].code == Alarm::Budget);
}

TEST_CASE("no alarm on correct instances") {
    for (int async = 0; async < 2; ++async)
        for (int s = 0; s < 4; ++s) {
            GraphKind kinds[] = {GraphKind::RandomConnected, GraphKind::Grid, GraphKind::Path, GraphKind::Star};
            auto g = generate_graph(kinds[s], 20 + 11 * s, 70 + s);
            auto c = certify(g);
            Simulator<VerifierProgram> sim(g, VerifierProgram{verifier_start(g, c.tree, c.bundles), {async != 0}},
                                           Scheduler{async ? SchedMode::Async : SchedMode::Sync, 9}, {},
                                           TraceLevel::Off);
            sim.track_memory = false;
            double l = std::log2(g.n());
            sim.run(static_cast<std::uint64_t>(20 * l * l));
            INFO(to_string(kinds[s]) << " async=" << async);
            CHECK(sim.trace.of_kind("alarm").empty());
            auto d = measure_detection(g, sim.trace, 0, {});
            CHECK(!d.detected);
        }
}

TEST_CASE("a parent-link cycle is caught within one round") {
    auto g = generate_graph(GraphKind::RandomConnected, 40, 8);
    auto c = certify(g);
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        auto r = detect_run(g, c, Corruption::NonTree, false, seed, 1, 500);
        CHECK(r.d.detected);
        CHECK(r.d.time <= 1);
    }
}

TEST_CASE("a lighter non-tree edge is detected") {
    std::map<Alarm, int> codes;
    for (std::uint64_t s = 1; s <= 6; ++s) {
        auto g = generate_graph(GraphKind::RandomConnected, 32, 500 + s);
        auto c = nonminimal_certificate(g);
        CHECK(!(subgraph_edges(g, c.tree) == kruskal_oracle(g)));
        for (int async = 0; async < 2; ++async) {
            auto r = detect_run(g, c, Corruption::NonMinimal, async != 0, s, 1, 4000);
            CHECK(r.d.detected);
        }
        // the one-round checker sees the certificate's own weight claims violated
        auto f = full_start(g, c.tree, c.hier, c.bundles);
        Simulator<FullProgram> sim(g, FullProgram{f}, Scheduler{}, {}, TraceLevel::Off);
        sim.run(1);
        for (auto& x : sim.states)
            if (x.alarm) ++codes[x.code];
    }
    CHECK(codes[Alarm::C2] + codes[Alarm::C1] > 0);
}

TEST_CASE("corruption corpus: detected, local, no alarm before the fault") {
    for (auto k : all_corruptions()) {
        if (k == Corruption::NonMinimal) continue;
        for (int async = 0; async < 2; ++async)
            for (std::uint64_t s = 1; s <= 3; ++s) {
                auto g = generate_graph(GraphKind::RandomConnected, 32, 600 + s);
                auto c = certify(g);
                auto r = detect_run(g, c, k, async != 0, s, 1, 6000);
                INFO(to_string(k) << " async=" << async << " seed=" << s);
                CHECK(r.clean_before);
                CHECK(r.d.detected);
                CHECK(r.local);
            }
    }
}

TEST_CASE("corruption names round-trip") {
    for (auto k : all_corruptions()) CHECK(parse_corruption(to_string(k)) == k);
    CHECK_THROWS(parse_corruption("bogus"));
}

TEST_CASE("one-round checker: silent when correct, alarms one round after a fault") {
    for (int n : {24, 48}) {
        auto g = generate_graph(GraphKind::RandomConnected, n, 90 + n);
        auto c = certify(g);
        auto f = full_start(g, c.tree, c.hier, c.bundles);
        Simulator<FullProgram> clean(g, FullProgram{f}, Scheduler{}, {}, TraceLevel::Off);
        clean.run(10);
        CHECK(clean.trace.of_kind("alarm").empty());

        std::mt19937_64 rng(n);
        for (int trial = 0; trial < 10; ++trial) {
            auto bad = f;
            int v = static_cast<int>(rng() % g.n());
            int j = static_cast<int>(rng() % bad[v].all.size());
            auto& x = bad[v].all[j];
            if (x.present) x.w ^= 1;
            else x = piece(g.ids[v], j, 1);
            Simulator<FullProgram> sim(g, FullProgram{bad}, Scheduler{}, {}, TraceLevel::Off);
            sim.run(1);
            CHECK(!sim.trace.of_kind("alarm").empty());
        }
    }
}

TEST_CASE("fault region contains the fault's parts") {
    auto g = generate_graph(GraphKind::RandomConnected, 40, 4);
    auto c = certify(g);
    auto region = fault_region(g, c.bundles, {3});
    CHECK(region[3]);
    for (int v = 0; v < g.n(); ++v)
        if (c.bundles[v].toproot == c.bundles[3].toproot || c.bundles[v].botroot == c.bundles[3].botroot)
            CHECK(region[v]);
}
