#include "mstsim/graph.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <random>
#include <set>

namespace mstsim {

int WeightedGraph::max_degree() const {
    int d = 0;
    for (auto& a : adj) d = std::max(d, static_cast<int>(a.size()));
    return d;
}

NodeId WeightedGraph::max_id() const {
    NodeId m = 0;
    for (auto id : ids) m = std::max(m, id);
    return m;
}

Weight WeightedGraph::max_weight() const {
    Weight m = 0;
    for (auto& e : edges) m = std::max(m, e.w);
    return m;
}

int WeightedGraph::add_node(NodeId id) {
    ids.push_back(id);
    adj.emplace_back();
    index_[id] = n() - 1;
    return n() - 1;
}

int WeightedGraph::add_edge(int a, int b, Weight w) {
    return add_edge_ports(a, degree(a) + 1, b, degree(b) + 1, w);
}

int WeightedGraph::add_edge_ports(int a, int pa, int b, int pb, Weight w) {
    int e = m();
    edges.push_back({a, b, pa, pb, w});
    auto place = [&](int v, int p, Port port) {
        if (p < 1) throw Error("parse", "port numbers start at 1");
        if (static_cast<int>(adj[v].size()) < p) adj[v].resize(p);
        if (adj[v][p - 1].nbr != -1) throw Error("parse", "duplicate port " + std::to_string(p) + " at node " + std::to_string(ids[v]));
        adj[v][p - 1] = port;
    };
    place(a, pa, {b, pb, e, w});
    place(b, pb, {a, pa, e, w});
    return e;
}

int WeightedGraph::index_of(NodeId id) const {
    auto it = index_.find(id);
    return it == index_.end() ? -1 : it->second;
}

int WeightedGraph::port_to(int v, int u) const {
    for (int p = 1; p <= degree(v); ++p)
        if (adj[v][p - 1].nbr == u) return p;
    return 0;
}

void WeightedGraph::rebuild_index() {
    index_.clear();
    for (int v = 0; v < n(); ++v) index_[ids[v]] = v;
}

bool WeightedGraph::operator==(const WeightedGraph& o) const {
    if (ids != o.ids || edges.size() != o.edges.size()) return false;
    for (size_t i = 0; i < edges.size(); ++i) {
        auto& x = edges[i];
        auto& y = o.edges[i];
        if (x.a != y.a || x.b != y.b || x.pa != y.pa || x.pb != y.pb || x.w != y.w) return false;
    }
    return true;
}

GraphKind parse_graph_kind(const std::string& s) {
    if (s == "random" || s == "random-connected") return GraphKind::RandomConnected;
    if (s == "path") return GraphKind::Path;
    if (s == "star") return GraphKind::Star;
    if (s == "grid") return GraphKind::Grid;
    if (s == "complete") return GraphKind::Complete;
    throw Error("invalid-parameter", "unknown graph kind '" + s + "'");
}

std::string to_string(GraphKind k) {
    switch (k) {
        case GraphKind::RandomConnected: return "random-connected";
        case GraphKind::Path: return "path";
        case GraphKind::Star: return "star";
        case GraphKind::Grid: return "grid";
        case GraphKind::Complete: return "complete";
    }
    return "?";
}

namespace {

std::uint64_t uniform(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
    return lo + rng() % (hi - lo + 1);
}

// k distinct values from [lo, hi], in sampling order.
std::vector<std::uint64_t> sample_distinct(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi, size_t k) {
    std::vector<std::uint64_t> out;
    std::set<std::uint64_t> seen;
    std::uint64_t range = hi - lo + 1;
    if (k > range) throw Error("invalid-parameter", "range too small for distinct sample");
    if (range <= 4 * k) {
        std::vector<std::uint64_t> all(range);
        std::iota(all.begin(), all.end(), lo);
        for (size_t i = 0; i < k; ++i) {
            size_t j = i + rng() % (range - i);
            std::swap(all[i], all[j]);
        }
        all.resize(k);
        return all;
    }
    while (out.size() < k) {
        auto x = uniform(rng, lo, hi);
        if (seen.insert(x).second) out.push_back(x);
    }
    return out;
}

}  // namespace

WeightedGraph generate_graph(GraphKind kind, int n, std::uint64_t seed) {
    if (n < 1) throw Error("invalid-parameter", "n must be at least 1");
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(kind) * 1315423911ULL + n);
    std::vector<std::pair<int, int>> pairs;
    auto un = static_cast<std::uint64_t>(n);
    switch (kind) {
        case GraphKind::Path:
            for (int i = 1; i < n; ++i) pairs.push_back({i - 1, i});
            break;
        case GraphKind::Star:
            for (int i = 1; i < n; ++i) pairs.push_back({0, i});
            break;
        case GraphKind::Complete:
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) pairs.push_back({i, j});
            break;
        case GraphKind::Grid: {
            int r = 1;
            while ((r + 1) * (r + 1) <= n) ++r;
            int c = (n + r - 1) / r;
            for (int i = 0; i < n; ++i) {
                int row = i / c, col = i % c;
                if (col + 1 < c && i + 1 < n) pairs.push_back({i, i + 1});
                if (i + c < n) pairs.push_back({i, i + c});
                (void)row;
            }
            break;
        }
        case GraphKind::RandomConnected: {
            std::set<std::pair<int, int>> have;
            for (int i = 1; i < n; ++i) {
                int j = static_cast<int>(rng() % i);
                pairs.push_back({j, i});
                have.insert({j, i});
            }
            std::uint64_t maxm = un * (un - 1) / 2;
            std::uint64_t target = std::min<std::uint64_t>(maxm, 2 * un - 1);
            while (pairs.size() < target) {
                int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
                if (a == b) continue;
                if (a > b) std::swap(a, b);
                if (have.insert({a, b}).second) pairs.push_back({a, b});
            }
            std::shuffle(pairs.begin(), pairs.end(), rng);
            break;
        }
    }
    auto ids = sample_distinct(rng, 1, std::max<std::uint64_t>(1, un * un), n);
    std::uint64_t wmax = std::max<std::uint64_t>(un * un * un, pairs.size());
    auto ws = sample_distinct(rng, 1, wmax, pairs.size());
    WeightedGraph g;
    for (int i = 0; i < n; ++i) g.add_node(ids[i]);
    for (size_t k = 0; k < pairs.size(); ++k) g.add_edge(pairs[k].first, pairs[k].second, ws[k]);
    return g;
}

std::vector<int> subgraph_edges(const WeightedGraph& g, const ComponentMap& c) {
    std::vector<char> in(g.m(), 0);
    for (int v = 0; v < g.n(); ++v) {
        int p = c.parent_port[v];
        if (p >= 1 && p <= g.degree(v)) in[g.port(v, p).edge] = 1;
    }
    std::vector<int> out;
    for (int e = 0; e < g.m(); ++e)
        if (in[e]) out.push_back(e);
    return out;
}

bool is_spanning_tree(const WeightedGraph& g, const ComponentMap& c) {
    int n = g.n();
    if (static_cast<int>(c.parent_port.size()) != n) return false;
    int roots = 0;
    for (int v = 0; v < n; ++v) {
        int p = c.parent_port[v];
        if (p == 0) ++roots;
        else if (p < 0 || p > g.degree(v)) return false;
    }
    if (roots != 1) return false;
    // every node must reach the root by following links without repeating
    std::vector<int> state(n, 0);
    for (int v = 0; v < n; ++v) {
        std::vector<int> path;
        int x = v;
        while (x != -1 && state[x] == 0) {
            state[x] = 1;
            path.push_back(x);
            x = c.parent(g, x);
        }
        if (x != -1 && state[x] == 1) return false;
        for (int y : path) state[y] = 2;
    }
    // a link pair u->v, v->u would give fewer than n-1 edges
    return static_cast<int>(subgraph_edges(g, c).size()) == n - 1;
}

ComponentMap orient_tree(const WeightedGraph& g, const std::vector<int>& tree_edges, int root) {
    std::vector<char> in(g.m(), 0);
    for (int e : tree_edges) in[e] = 1;
    ComponentMap c;
    c.parent_port.assign(g.n(), -1);
    c.parent_port[root] = 0;
    std::queue<int> q;
    q.push(root);
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (auto& pt : g.adj[v]) {
            if (!in[pt.edge] || c.parent_port[pt.nbr] != -1) continue;
            c.parent_port[pt.nbr] = pt.back;
            q.push(pt.nbr);
        }
    }
    for (int v = 0; v < g.n(); ++v)
        if (c.parent_port[v] == -1) throw Error("no-spanning-tree", "edge set does not span the graph");
    return c;
}

PerturbKey perturb_key(const WeightedGraph& g, int e, const std::vector<char>& in_tree) {
    auto& ed = g.edges[e];
    NodeId x = g.ids[ed.a], y = g.ids[ed.b];
    return {ed.w, in_tree[e] ? 0 : 1, std::min(x, y), std::max(x, y)};
}

WeightedGraph perturb_weights(const WeightedGraph& g, const std::vector<int>& tree_edges) {
    std::vector<char> in(g.m(), 0);
    for (int e : tree_edges) in[e] = 1;
    std::vector<int> order(g.m());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return perturb_key(g, a, in) < perturb_key(g, b, in); });
    WeightedGraph h = g;
    for (int r = 0; r < g.m(); ++r) {
        int e = order[r];
        auto& ed = h.edges[e];
        ed.w = static_cast<Weight>(r + 1);
        h.adj[ed.a][ed.pa - 1].w = ed.w;
        h.adj[ed.b][ed.pb - 1].w = ed.w;
    }
    return h;
}

WeightedGraph perturb_weights(const WeightedGraph& g, const ComponentMap& tree) {
    return perturb_weights(g, subgraph_edges(g, tree));
}

namespace {
struct Dsu {
    std::vector<int> p;
    explicit Dsu(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
    bool unite(int a, int b) {
        a = find(a), b = find(b);
        if (a == b) return false;
        p[a] = b;
        return true;
    }
};
}  // namespace

std::vector<int> kruskal_oracle(const WeightedGraph& g) {
    std::vector<int> order(g.m());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return g.edges[a].w < g.edges[b].w; });
    Dsu d(g.n());
    std::vector<int> out;
    for (int e : order)
        if (d.unite(g.edges[e].a, g.edges[e].b)) out.push_back(e);
    if (static_cast<int>(out.size()) != g.n() - 1) throw Error("no-spanning-tree", "graph is disconnected");
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> prim_oracle(const WeightedGraph& g) {
    int n = g.n();
    if (n == 0) return {};
    std::vector<char> done(n, 0);
    using Item = std::pair<Weight, int>;  // weight, edge
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    std::vector<int> out;
    auto take = [&](int v) {
        done[v] = 1;
        for (auto& pt : g.adj[v])
            if (!done[pt.nbr]) pq.push({pt.w, pt.edge});
    };
    take(0);
    while (!pq.empty()) {
        auto [w, e] = pq.top();
        pq.pop();
        auto& ed = g.edges[e];
        int u = done[ed.a] ? (done[ed.b] ? -1 : ed.b) : ed.a;
        if (u == -1) continue;
        out.push_back(e);
        take(u);
    }
    if (static_cast<int>(out.size()) != n - 1) throw Error("no-spanning-tree", "graph is disconnected");
    std::sort(out.begin(), out.end());
    return out;
}

Weight total_weight(const WeightedGraph& g, const std::vector<int>& es) {
    Weight s = 0;
    for (int e : es) s += g.edges[e].w;
    return s;
}

bool weights_distinct(const WeightedGraph& g) {
    std::vector<Weight> ws;
    for (auto& e : g.edges) ws.push_back(e.w);
    std::sort(ws.begin(), ws.end());
    return std::adjacent_find(ws.begin(), ws.end()) == ws.end();
}

std::vector<std::string> validate_graph(const WeightedGraph& g) {
    std::vector<std::string> out;
    std::set<NodeId> seen;
    for (auto id : g.ids)
        if (!seen.insert(id).second) out.push_back("duplicate id " + std::to_string(id));
    for (int v = 0; v < g.n(); ++v)
        for (int p = 1; p <= g.degree(v); ++p) {
            auto& pt = g.port(v, p);
            if (pt.nbr < 0) {
                out.push_back("port gap at node " + std::to_string(g.ids[v]) + " port " + std::to_string(p));
                continue;
            }
            auto& back = g.adj[pt.nbr];
            if (pt.back < 1 || pt.back > static_cast<int>(back.size()) || back[pt.back - 1].nbr != v)
                out.push_back("asymmetric port at node " + std::to_string(g.ids[v]) + " port " + std::to_string(p));
        }
    std::set<std::pair<int, int>> pairs;
    for (auto& e : g.edges) {
        if (e.a == e.b) out.push_back("self loop at node " + std::to_string(g.ids[e.a]));
        if (!pairs.insert({std::min(e.a, e.b), std::max(e.a, e.b)}).second)
            out.push_back("parallel edge " + std::to_string(g.ids[e.a]) + "-" + std::to_string(g.ids[e.b]));
    }
    if (!weights_distinct(g)) out.push_back("weight tie");
    if (g.n() > 0) {
        Dsu d(g.n());
        int comps = g.n();
        for (auto& e : g.edges)
            if (d.unite(e.a, e.b)) --comps;
        if (comps != 1) out.push_back("disconnected");
    }
    return out;
}

std::vector<int> bfs_distances(const WeightedGraph& g, const std::vector<int>& sources) {
    std::vector<int> d(g.n(), -1);
    std::queue<int> q;
    for (int s : sources) {
        d[s] = 0;
        q.push(s);
    }
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (auto& p : g.adj[v])
            if (d[p.nbr] < 0) {
                d[p.nbr] = d[v] + 1;
                q.push(p.nbr);
            }
    }
    return d;
}

}  // namespace mstsim
