#include <algorithm>
#include <functional>
#include <random>
#include <set>

#include "doctest.h"
#include "mstsim/graph.hpp"

using namespace mstsim;

namespace {

WeightedGraph k3(Weight a, Weight b, Weight c) {
    WeightedGraph g;
    g.add_node(1), g.add_node(2), g.add_node(3);
    g.add_edge(0, 1, a);
    g.add_edge(1, 2, b);
    g.add_edge(0, 2, c);
    return g;
}

std::vector<int> ranks_order(const WeightedGraph& g) {
    std::vector<int> o(g.m());
    for (int i = 0; i < g.m(); ++i) o[i] = i;
    std::sort(o.begin(), o.end(), [&](int a, int b) { return g.edges[a].w < g.edges[b].w; });
    return o;
}

// All spanning trees of a small graph, as sorted edge index lists.
void spanning_trees(const WeightedGraph& g, std::vector<std::vector<int>>& out) {
    int m = g.m(), n = g.n();
    std::vector<int> pick;
    std::function<void(int)> rec = [&](int e) {
        if (static_cast<int>(pick.size()) == n - 1) {
            std::vector<int> p(n);
            for (int i = 0; i < n; ++i) p[i] = i;
            std::function<int(int)> f = [&](int x) { return p[x] == x ? x : p[x] = f(p[x]); };
            for (int k : pick) {
                int a = f(g.edges[k].a), b = f(g.edges[k].b);
                if (a == b) return;
                p[a] = b;
            }
            out.push_back(pick);
            return;
        }
        if (e == m || m - e < n - 1 - static_cast<int>(pick.size())) return;
        pick.push_back(e);
        rec(e + 1);
        pick.pop_back();
        rec(e + 1);
    };
    rec(0);
}

}  // namespace

TEST_CASE("generator shapes") {
    auto p = generate_graph(GraphKind::Path, 2, 5);
    CHECK(p.n() == 2);
    CHECK(p.m() == 1);
    auto c = generate_graph(GraphKind::Complete, 3, 9);
    CHECK(c.m() == 3);
    for (int v = 0; v < 3; ++v) CHECK(c.degree(v) == 2);
    CHECK_THROWS_AS(generate_graph(GraphKind::Path, 0, 1), Error);
    try {
        generate_graph(GraphKind::Star, 0, 1);
    } catch (const Error& e) {
        CHECK(e.code == "invalid-parameter");
    }
    for (auto k : {GraphKind::RandomConnected, GraphKind::Path, GraphKind::Star, GraphKind::Grid, GraphKind::Complete})
        for (int n : {1, 2, 5, 17, 40}) {
            auto g = generate_graph(k, n, 3);
            CHECK(g.n() == n);
            CHECK(validate_graph(g).empty());
            for (auto id : g.ids) CHECK(id <= std::max<NodeId>(1, NodeId(n) * n));
        }
}

TEST_CASE("generator determinism") {
    auto a = generate_graph(GraphKind::RandomConnected, 64, 7);
    auto b = generate_graph(GraphKind::RandomConnected, 64, 7);
    CHECK(validate_graph(a).empty());
    CHECK(a == b);
    CHECK(serialize_graph(a) == serialize_graph(b));
    auto c = generate_graph(GraphKind::RandomConnected, 64, 8);
    CHECK(!(a == c));
}

TEST_CASE("perturbation examples") {
    // e1 in T, e2 not in T, equal weights
    WeightedGraph g;
    g.add_node(10), g.add_node(20), g.add_node(30);
    int e1 = g.add_edge(0, 1, 5);
    int e2 = g.add_edge(1, 2, 5);
    g.add_edge(0, 2, 9);
    auto h = perturb_weights(g, std::vector<int>{e1});
    CHECK(h.edges[e1].w < h.edges[e2].w);

    // K3, all weights 1, T = {(1,2),(2,3)}
    auto t = k3(1, 1, 1);
    auto ht = perturb_weights(t, std::vector<int>{0, 1});
    CHECK(ranks_order(ht) == std::vector<int>{0, 1, 2});
    CHECK(validate_graph(ht).empty());

    // distinct weights: order unchanged
    auto d = generate_graph(GraphKind::RandomConnected, 30, 2);
    auto hd = perturb_weights(d, kruskal_oracle(d));
    for (int a = 0; a < d.m(); ++a)
        for (int b = 0; b < d.m(); ++b)
            if (d.edges[a].w < d.edges[b].w) CHECK(hd.edges[a].w < hd.edges[b].w);
}

TEST_CASE("perturbation is order-isomorphic to the tuple order") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 60; ++trial) {
        int n = 2 + static_cast<int>(rng() % 7);
        auto g = generate_graph(GraphKind::RandomConnected, n, trial);
        for (auto& e : g.edges) e.w = 1 + rng() % 3;
        for (int v = 0; v < g.n(); ++v)
            for (auto& pt : g.adj[v]) pt.w = g.edges[pt.edge].w;
        std::vector<int> tree;
        std::vector<char> in(g.m(), 0);
        for (int e = 0; e < g.m(); ++e)
            if (rng() & 1) tree.push_back(e), in[e] = 1;
        auto h = perturb_weights(g, tree);
        CHECK(weights_distinct(h));
        for (int a = 0; a < g.m(); ++a)
            for (int b = 0; b < g.m(); ++b)
                CHECK((perturb_key(g, a, in) < perturb_key(g, b, in)) == (h.edges[a].w < h.edges[b].w));
    }
}

TEST_CASE("perturbation preserves MST membership") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 3 + static_cast<int>(rng() % 5);
        auto g = generate_graph(GraphKind::RandomConnected, n, 100 + trial);
        for (auto& e : g.edges) e.w = 1 + rng() % 2;
        for (int v = 0; v < g.n(); ++v)
            for (auto& pt : g.adj[v]) pt.w = g.edges[pt.edge].w;
        std::vector<std::vector<int>> trees;
        spanning_trees(g, trees);
        Weight best = ~Weight{0};
        for (auto& t : trees) best = std::min(best, total_weight(g, t));
        for (auto& t : trees) {
            bool is_mst = total_weight(g, t) == best;
            auto h = perturb_weights(g, t);
            CHECK(is_mst == (kruskal_oracle(h) == t));
        }
    }
}

TEST_CASE("MST oracles") {
    auto p = generate_graph(GraphKind::Path, 2, 1);
    CHECK(kruskal_oracle(p) == std::vector<int>{0});
    auto t = k3(1, 2, 3);
    CHECK(kruskal_oracle(t) == std::vector<int>{0, 1});
    for (int s = 0; s < 30; ++s) {
        auto g = generate_graph(GraphKind::RandomConnected, 64, 7 + s);
        auto k = kruskal_oracle(g);
        CHECK(k == prim_oracle(g));
        CHECK(static_cast<int>(k.size()) == g.n() - 1);
        auto tr = orient_tree(g, k, 0);
        CHECK(is_spanning_tree(g, tr));
    }
    WeightedGraph dis;
    dis.add_node(1), dis.add_node(2);
    CHECK_THROWS_AS(kruskal_oracle(dis), Error);
}

TEST_CASE("validation") {
    CHECK(validate_graph(k3(1, 2, 3)).empty());
    auto g = k3(1, 2, 3);
    g.ids[1] = 1;
    auto v = validate_graph(g);
    CHECK(std::any_of(v.begin(), v.end(), [](auto& s) { return s.rfind("duplicate id", 0) == 0; }));
    auto t = k3(4, 4, 1);
    v = validate_graph(t);
    CHECK(std::find(v.begin(), v.end(), "weight tie") != v.end());
    CHECK(validate_graph(perturb_weights(t, std::vector<int>{0, 2})).empty());
}

TEST_CASE("file round trips") {
    auto g = generate_graph(GraphKind::Grid, 12, 4);
    auto text = serialize_graph(g);
    CHECK(parse_graph(text) == g);
    auto tree = orient_tree(g, kruskal_oracle(g), 3);
    auto ct = serialize_components(g, tree);
    CHECK(parse_components(g, ct) == tree);
    CHECK_THROWS_AS(parse_graph("2 1\nnode 1\nnode 2\nedge 1 1 3 1 5\n"), Error);
    CHECK_THROWS_AS(parse_graph("garbage"), Error);
    auto s = graph_from_spec("random:n=20:seed=3");
    CHECK(s == generate_graph(GraphKind::RandomConnected, 20, 3));
}
