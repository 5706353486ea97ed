#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"
#include "mstsim/marker.hpp"
#include "mstsim/partitions.hpp"

using namespace mstsim;

namespace {

struct Classified {
    bool top = false;
    std::string color;
    std::uint64_t size = 0;
};

// classify events keyed by (root id, level)
std::map<std::pair<NodeId, int>, Classified> classified(const Trace& t) {
    std::map<std::pair<NodeId, int>, Classified> out;
    for (auto* e : t.of_kind("classify")) {
        std::istringstream is(e->detail);
        std::string f, cls, col, sz;
        is >> f >> cls >> col >> sz;
        auto comma = f.find(',');
        NodeId z = std::stoull(f.substr(2, comma - 2));
        int lev = std::stoi(f.substr(comma + 1));
        out[{z, lev}] = {cls == "class=top", col.substr(6), std::stoull(sz.substr(5))};
    }
    return out;
}

void expect_equal(const std::vector<LabelBundle>& a, const std::vector<LabelBundle>& b, const WeightedGraph& g) {
    REQUIRE(a.size() == b.size());
    for (size_t v = 0; v < a.size(); ++v) {
        INFO("node " << g.ids[v]);
        CHECK(a[v].roots == b[v].roots);
        CHECK(a[v].endp == b[v].endp);
        CHECK(a[v].parents == b[v].parents);
        CHECK(a[v].agg == b[v].agg);
        CHECK(a[v].pid == b[v].pid);
        CHECK(a[v].sp_rid == b[v].sp_rid);
        CHECK(a[v].sp_d == b[v].sp_d);
        CHECK(a[v].numk_n == b[v].numk_n);
        CHECK(a[v].numk_nv == b[v].numk_nv);
        CHECK(a[v].ediam_x == b[v].ediam_x);
        CHECK(a[v].toproot == b[v].toproot);
        CHECK(a[v].botroot == b[v].botroot);
        CHECK(a[v].jdelim == b[v].jdelim);
        for (int k = 0; k < 2; ++k) {
            CHECK(a[v].pt[k] == b[v].pt[k]);
            CHECK(a[v].pb[k] == b[v].pb[k]);
        }
    }
}

}  // namespace

TEST_CASE("distributed marker equals the centralized marker") {
    int checked = 0;
    for (int s = 0; s < 40; ++s) {
        GraphKind kinds[] = {GraphKind::RandomConnected, GraphKind::Path, GraphKind::Star, GraphKind::Grid,
                             GraphKind::Complete};
        auto kind = kinds[s % 5];
        int n = kind == GraphKind::Complete ? 2 + s % 24 : 1 + (s * 37) % 160;
        auto g = generate_graph(kind, n, 300 + s);
        auto r = run_marker(g, TraceLevel::Off);
        CHECK(r.problems.empty());
        CHECK(r.tree == orient_tree(g, kruskal_oracle(g), g.index_of(r.bundles[0].sp_rid)));
        auto want = mark_all(g, r.tree, r.hier);
        expect_equal(r.bundles, want, g);
        CHECK(check_labels(g, r.tree, r.bundles).empty());
        ++checked;
    }
    CHECK(checked == 40);
}

TEST_CASE("marker finishes within a linear number of rounds") {
    for (int n : {16, 32, 64, 128, 256}) {
        auto g = generate_graph(GraphKind::RandomConnected, n, 11);
        auto r = run_marker(g, TraceLevel::Off);
        std::uint64_t extra = r.total_rounds - r.alg_rounds;
        MESSAGE("n=" << n << " alg=" << r.alg_rounds << " marker=" << extra);
        CHECK(extra <= 40ull * n + 64);
        CHECK(r.total_rounds <= 84ull * n + 64);
    }
}

TEST_CASE("multi_wave: single node and two nodes") {
    auto g1 = generate_graph(GraphKind::Path, 1, 1);
    auto r1 = run_marker(g1, TraceLevel::Milestones);
    auto c1 = classified(r1.trace);
    REQUIRE(c1.size() == 1);  // the singleton is T
    CHECK(c1.begin()->second.size == 1);

    auto g2 = generate_graph(GraphKind::Path, 2, 1);
    auto r2 = run_marker(g2, TraceLevel::Milestones, MarkerOptions{16});
    auto c2 = classified(r2.trace);
    // two level-0 waves plus the level-1 wave
    REQUIRE(c2.size() == 3);
    int lev0 = 0;
    for (auto& [k, c] : c2) {
        if (k.second == 0) {
            ++lev0;
            CHECK(c.size == 1);
        } else {
            CHECK(c.size == 2);
        }
    }
    CHECK(lev0 == 2);
    std::uint64_t t0 = 0, t1 = 0;
    for (auto* e : r2.trace.of_kind("classify")) (e->detail.find(",0 ") != std::string::npos ? t0 : t1) = e->t;
    CHECK(t0 < t1);
}

TEST_CASE("multi_wave: uncapped counts equal member sizes") {
    for (int s = 0; s < 12; ++s) {
        int n = s == 0 ? 8 : 5 + s * 9;
        auto g = generate_graph(GraphKind::RandomConnected, n, 70 + s);
        auto r = run_marker(g, TraceLevel::Milestones, MarkerOptions{static_cast<std::uint64_t>(2 * n)});
        auto c = classified(r.trace);
        CHECK(c.size() == r.hier.frags.size());
        for (size_t f = 0; f < r.hier.frags.size(); ++f) {
            auto info = fragment_info(g, r.tree, r.hier, static_cast<int>(f));
            auto it = c.find({info.z, static_cast<int>(info.lev)});
            REQUIRE(it != c.end());
            CHECK(it->second.size == r.hier.frags[f].members.size());
        }
    }
}

TEST_CASE("distributed classification matches classify_fragments") {
    for (int s = 0; s < 15; ++s) {
        int n = 10 + s * 13;
        auto g = generate_graph(s % 3 ? GraphKind::RandomConnected : GraphKind::Grid, n, 500 + s);
        auto r = run_marker(g, TraceLevel::Milestones);
        auto c = classified(r.trace);
        auto cls = classify_fragments(r.hier, g.n());
        for (size_t f = 0; f < r.hier.frags.size(); ++f) {
            auto info = fragment_info(g, r.tree, r.hier, static_cast<int>(f));
            auto& got = c.at({info.z, static_cast<int>(info.lev)});
            CHECK(got.top == cls[f].top);
            if (cls[f].top) CHECK(got.color == to_string(cls[f].color));
        }
    }
}

TEST_CASE("marker trace milestones") {
    auto g = generate_graph(GraphKind::RandomConnected, 40, 3);
    auto r = run_marker(g, TraceLevel::Milestones);
    CHECK(!r.trace.of_kind("store").empty());
    CHECK(!r.trace.of_kind("part").empty());
    CHECK(!r.trace.of_kind("classify").empty());
}

TEST_CASE("construct memory stays within C log n") {
    double c64 = 0;
    for (int n : {64, 128, 256}) {
        auto g = generate_graph(GraphKind::RandomConnected, n, 5);
        auto r = run_marker(g, TraceLevel::Off);
        double per = static_cast<double>(r.peak_bits) / std::log2(n);
        MESSAGE("n=" << n << " peak=" << r.peak_bits << " per log n=" << per);
        if (n == 64) c64 = per;
        else CHECK(per <= c64);
    }
}
