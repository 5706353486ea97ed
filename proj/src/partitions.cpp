#include "mstsim/partitions.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>

namespace mstsim {

std::string to_string(Color c) {
    switch (c) {
        case Color::Red: return "red";
        case Color::Blue: return "blue";
        case Color::Large: return "large";
        case Color::Green: return "green";
        default: return "none";
    }
}

namespace {

// Children in ascending port order at the parent.
std::vector<std::vector<int>> tree_children(const WeightedGraph& g, const ComponentMap& tree) {
    std::vector<std::vector<int>> kids(g.n());
    for (int v = 0; v < g.n(); ++v)
        for (int p = 1; p <= g.degree(v); ++p) {
            int u = g.port(v, p).nbr;
            if (tree.parent(g, u) == v) kids[v].push_back(u);
        }
    return kids;
}

int set_root(const WeightedGraph& g, const ComponentMap& tree, const std::vector<int>& members,
             const std::vector<char>& in) {
    for (int v : members) {
        int p = tree.parent(g, v);
        if (p < 0 || !in[p]) return v;
    }
    return -1;
}

Part make_part(const WeightedGraph& g, const ComponentMap& tree, bool top, std::vector<int> members) {
    Part p;
    p.top = top;
    std::sort(members.begin(), members.end());
    std::vector<char> in(g.n(), 0);
    for (int v : members) in[v] = 1;
    p.root = set_root(g, tree, members, in);
    p.members = std::move(members);
    return p;
}

bool info_less(const Info& a, const Info& b) { return a.lev != b.lev ? a.lev < b.lev : a.z < b.z; }

}  // namespace

Info fragment_info(const WeightedGraph& g, const ComponentMap& tree, const Hierarchy& h, int f) {
    const auto& F = h.frags[f];
    Info x;
    x.present = true;
    x.z = g.ids[fragment_root(g, tree, F)];
    x.lev = static_cast<std::uint32_t>(F.level);
    x.w = F.cand >= 0 ? g.edges[F.cand].w : kInfWeight;
    return x;
}

std::vector<FragClass> classify_fragments(const Hierarchy& h, int n) {
    int L = big_l(static_cast<std::uint64_t>(n));
    std::vector<FragClass> c(h.frags.size());
    for (size_t f = 0; f < h.frags.size(); ++f) c[f].top = static_cast<int>(h.frags[f].members.size()) >= L;
    for (size_t f = 0; f < h.frags.size(); ++f) {
        if (!c[f].top) continue;
        bool topkid = false;
        for (int k : h.frags[f].children) topkid = topkid || c[k].top;
        c[f].color = topkid ? Color::Large : Color::Red;
    }
    for (size_t f = 0; f < h.frags.size(); ++f) {
        int p = h.frags[f].parent;
        if (c[f].top || p < 0) continue;
        if (c[p].color == Color::Large) c[f].color = Color::Blue;
        else if (c[p].color == Color::Red) c[f].color = Color::Green;
    }
    return c;
}

std::vector<Part> build_pp(const WeightedGraph& g, const ComponentMap& tree, const Hierarchy& h,
                           const std::vector<FragClass>& cls) {
    int n = g.n();
    constexpr std::uint64_t INF = ~std::uint64_t{0};
    // (distance, part id) per node; red members are sources
    std::vector<std::pair<std::uint64_t, NodeId>> val(n, {INF, 0});
    std::vector<int> blue_of(n, -1);
    std::map<NodeId, std::vector<int>> parts;
    for (size_t f = 0; f < h.frags.size(); ++f) {
        if (cls[f].color == Color::Red) {
            NodeId rid = g.ids[fragment_root(g, tree, h.frags[f])];
            for (int v : h.frags[f].members) val[v] = {0, rid};
        } else if (cls[f].color == Color::Blue) {
            for (int v : h.frags[f].members) blue_of[v] = static_cast<int>(f);
        }
    }
    std::vector<int> large;
    for (size_t f = 0; f < h.frags.size(); ++f)
        if (cls[f].color == Color::Large) large.push_back(static_cast<int>(f));
    std::sort(large.begin(), large.end(), [&](int a, int b) { return h.frags[a].level < h.frags[b].level; });
    for (int f : large) {
        const auto& F = h.frags[f];
        std::vector<char> in(n, 0);
        for (int v : F.members) in[v] = 1;
        // blue children of F relax against everything already valued inside F
        std::vector<char> open(n, 0);
        for (int k : F.children)
            if (cls[k].color == Color::Blue)
                for (int v : h.frags[k].members) open[v] = 1;
        bool changed = true;
        while (changed) {
            changed = false;
            for (int v : F.members) {
                if (!open[v]) continue;
                for (auto& pt : g.adj[v]) {
                    int u = pt.nbr;
                    if (!in[u] || val[u].first == INF) continue;
                    bool tree_edge = tree.parent(g, u) == v || tree.parent(g, v) == u;
                    if (!tree_edge) continue;
                    std::uint64_t c = (open[u] && blue_of[u] == blue_of[v]) ? 0 : 1;
                    std::pair<std::uint64_t, NodeId> cand{val[u].first + c, val[u].second};
                    if (cand < val[v]) val[v] = cand, changed = true;
                }
            }
        }
        for (int v : F.members)
            if (open[v] && val[v].first == INF)
                throw Error("structural-impossibility", "blue fragment without a touching part");
    }
    for (int v = 0; v < n; ++v) {
        if (val[v].first == INF) throw Error("structural-impossibility", "node without a part");
        parts[val[v].second].push_back(v);
    }
    std::vector<Part> out;
    for (auto& [id, mem] : parts) out.push_back(make_part(g, tree, true, mem));
    return out;
}

std::vector<Part> split_top(const WeightedGraph& g, const ComponentMap& tree, const std::vector<Part>& pp, int L) {
    int n = g.n();
    auto kids = tree_children(g, tree);
    std::vector<Part> out;
    for (auto& P : pp) {
        std::vector<char> in(n, 0);
        for (int v : P.members) in[v] = 1;
        // preorder inside the part
        std::vector<int> order{P.root};
        for (size_t i = 0; i < order.size(); ++i)
            for (int c : kids[order[i]])
                if (in[c]) order.push_back(c);
        std::vector<int> h(n, 0);
        std::vector<char> cut(n, 0);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            int v = *it;
            int hv = 0;
            for (int c : kids[v])
                if (in[c] && !cut[c]) hv = std::max(hv, h[c] + 1);
            h[v] = hv;
            if (v != P.root && hv >= L - 1) cut[v] = 1;
        }
        std::vector<int> head(n, -1);
        for (int v : order) head[v] = (v == P.root || cut[v]) ? v : head[tree.parent(g, v)];
        std::map<int, std::vector<int>> cl;
        for (int v : order) cl[head[v]].push_back(v);
        if (static_cast<int>(cl[P.root].size()) < L) {
            int best = -1;
            for (auto& [hd, mem] : cl)
                if (hd != P.root && head[tree.parent(g, hd)] == P.root && (best < 0 || g.ids[hd] < g.ids[best]))
                    best = hd;
            if (best >= 0) {
                auto& r = cl[P.root];
                r.insert(r.end(), cl[best].begin(), cl[best].end());
                cl.erase(best);
            }
        }
        for (auto& [hd, mem] : cl) out.push_back(make_part(g, tree, true, mem));
    }
    std::sort(out.begin(), out.end(), [&](const Part& a, const Part& b) { return g.ids[a.root] < g.ids[b.root]; });
    return out;
}

std::vector<Part> build_bottom(const WeightedGraph& g, const ComponentMap& tree, const Hierarchy& h,
                               const std::vector<FragClass>& cls) {
    int n = g.n();
    std::map<int, std::vector<int>> groups;  // key: maximal bottom fragment, or -1-v for a lone node
    for (int v = 0; v < n; ++v) {
        int best = -1;
        for (int j = 0; j <= h.top; ++j) {
            int f = h.at[v][j];
            if (f >= 0 && !cls[f].top) best = f;
        }
        groups[best >= 0 ? best : -1 - v].push_back(v);
    }
    std::vector<Part> out;
    for (auto& [k, mem] : groups) out.push_back(make_part(g, tree, false, mem));
    std::sort(out.begin(), out.end(), [&](const Part& a, const Part& b) { return g.ids[a.root] < g.ids[b.root]; });
    return out;
}

Partitions build_partitions(const WeightedGraph& g, const ComponentMap& tree, const Hierarchy& h) {
    int n = g.n();
    Partitions p;
    p.L = big_l(static_cast<std::uint64_t>(n));
    p.cls = classify_fragments(h, n);
    p.pp = build_pp(g, tree, h, p.cls);
    p.top = split_top(g, tree, p.pp, p.L);
    p.bottom = build_bottom(g, tree, h, p.cls);
    auto index = [&](const std::vector<Part>& parts) {
        std::vector<int> of(n, -1);
        for (size_t i = 0; i < parts.size(); ++i)
            for (int v : parts[i].members) of[v] = static_cast<int>(i);
        return of;
    };
    p.pp_of = index(p.pp);
    p.top_of = index(p.top);
    p.bottom_of = index(p.bottom);
    p.jdelim.assign(n, h.top);
    for (int v = 0; v < n; ++v)
        for (int j = h.top; j >= 0; --j) {
            int f = h.at[v][j];
            if (f >= 0 && p.cls[f].top) p.jdelim[v] = j;
        }
    // pieces
    std::vector<std::set<int>> topfr(p.top.size()), botfr(p.bottom.size());
    for (size_t f = 0; f < h.frags.size(); ++f) {
        const auto& F = h.frags[f];
        if (p.cls[f].top) {
            for (int v : F.members) topfr[p.top_of[v]].insert(static_cast<int>(f));
        } else {
            botfr[p.bottom_of[F.members[0]]].insert(static_cast<int>(f));
        }
    }
    auto fill = [&](std::vector<Part>& parts, std::vector<std::set<int>>& fr) {
        for (size_t i = 0; i < parts.size(); ++i) {
            for (int f : fr[i]) parts[i].pieces.push_back(fragment_info(g, tree, h, f));
            std::sort(parts[i].pieces.begin(), parts[i].pieces.end(), info_less);
        }
    };
    fill(p.top, topfr);
    fill(p.bottom, botfr);
    return p;
}

std::vector<int> part_preorder(const WeightedGraph& g, const ComponentMap& tree, const Part& part) {
    std::vector<char> in(g.n(), 0);
    for (int v : part.members) in[v] = 1;
    auto kids = tree_children(g, tree);
    std::vector<int> out;
    std::vector<int> st{part.root};
    while (!st.empty()) {
        int v = st.back();
        st.pop_back();
        out.push_back(v);
        for (auto it = kids[v].rbegin(); it != kids[v].rend(); ++it)
            if (in[*it]) st.push_back(*it);
    }
    return out;
}

void distribute_info(const WeightedGraph& g, const ComponentMap& tree, const Partitions& p,
                     std::vector<LabelBundle>& b) {
    for (int v = 0; v < g.n(); ++v) {
        b[v].toproot = g.ids[p.top[p.top_of[v]].root];
        b[v].botroot = g.ids[p.bottom[p.bottom_of[v]].root];
        b[v].jdelim = p.jdelim[v];
        b[v].pt[0] = b[v].pt[1] = b[v].pb[0] = b[v].pb[1] = Info{};
    }
    for (int side = 0; side < 2; ++side) {
        const auto& parts = side == 0 ? p.top : p.bottom;
        for (auto& P : parts) {
            if (P.pieces.size() > 2 * P.members.size())
                throw Error("capacity-violation", "part rooted at " + std::to_string(g.ids[P.root]) + " has " +
                                                      std::to_string(P.pieces.size()) + " pieces");
            auto order = part_preorder(g, tree, P);
            for (size_t m = 0; m < P.pieces.size(); ++m) {
                auto& x = b[order[m / 2]];
                (side == 0 ? x.pt : x.pb)[m % 2] = P.pieces[m];
            }
        }
    }
}

std::vector<LabelBundle> mark_all(const WeightedGraph& g, const ComponentMap& tree, const Hierarchy& h) {
    auto b = mark_labels(g, tree, h);
    distribute_info(g, tree, build_partitions(g, tree, h), b);
    return b;
}

int part_diameter(const WeightedGraph& g, const ComponentMap& tree, const Part& part) {
    std::vector<char> in(g.n(), 0);
    for (int v : part.members) in[v] = 1;
    auto bfs = [&](int s, int& far) {
        std::vector<int> d(g.n(), -1);
        std::queue<int> q;
        q.push(s);
        d[s] = 0;
        far = s;
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            if (d[v] > d[far]) far = v;
            for (auto& pt : g.adj[v]) {
                int u = pt.nbr;
                if (!in[u] || d[u] >= 0) continue;
                if (tree.parent(g, u) != v && tree.parent(g, v) != u) continue;
                d[u] = d[v] + 1;
                q.push(u);
            }
        }
        return d[far];
    };
    int a, b;
    bfs(part.root, a);
    return bfs(a, b);
}

std::vector<std::string> check_partitions(const WeightedGraph& g, const ComponentMap& tree, const Hierarchy& h,
                                          const Partitions& p) {
    std::vector<std::string> out;
    int n = g.n();
    auto name = [&](const Part& P) {
        return std::string(P.top ? "Top" : "Bottom") + " part at " + std::to_string(g.ids[P.root]);
    };
    for (int side = 0; side < 2; ++side) {
        const auto& parts = side == 0 ? p.top : p.bottom;
        std::vector<int> cnt(n, 0);
        for (auto& P : parts) {
            for (int v : P.members) ++cnt[v];
            std::vector<char> in(n, 0);
            for (int v : P.members) in[v] = 1;
            int roots = 0;
            for (int v : P.members) {
                int q = tree.parent(g, v);
                if (q < 0 || !in[q]) ++roots;
            }
            if (roots != 1) out.push_back(name(P) + ": not a subtree");
            int sz = static_cast<int>(P.members.size());
            if (side == 0) {
                if (sz < p.L) out.push_back(name(P) + ": smaller than L");
                if (part_diameter(g, tree, P) > 4 * p.L) out.push_back(name(P) + ": diameter above 4L");
                std::vector<int> per(h.top + 1, 0);
                std::set<int> seen;
                for (int v : P.members)
                    for (int j = 0; j <= h.top; ++j) {
                        int f = h.at[v][j];
                        if (f >= 0 && p.cls[f].top && seen.insert(f).second) ++per[j];
                    }
                for (int j = 0; j <= h.top; ++j)
                    if (per[j] > 1) out.push_back(name(P) + ": two top fragments at level " + std::to_string(j));
            } else {
                // a lone node whose singleton is already top holds no bottom fragment (n <= 2)
                if (!P.pieces.empty() && sz >= p.L) out.push_back(name(P) + ": not smaller than L");
                if (P.pieces.size() > 2 * P.members.size()) out.push_back(name(P) + ": more than 2|P| fragments");
            }
        }
        for (int v = 0; v < n; ++v)
            if (cnt[v] != 1) out.push_back(std::string(side == 0 ? "Top" : "Bottom") + " does not cover node " +
                                           std::to_string(g.ids[v]) + " exactly once");
    }
    for (auto& P : p.pp) {
        std::set<int> seen;
        std::vector<int> per(h.top + 1, 0);
        for (int v : P.members)
            for (int j = 0; j <= h.top; ++j) {
                int f = h.at[v][j];
                if (f >= 0 && p.cls[f].top && seen.insert(f).second) ++per[j];
            }
        for (int j = 0; j <= h.top; ++j)
            if (per[j] > 1) out.push_back("merged part at " + std::to_string(g.ids[P.root]) + ": two top fragments at level " + std::to_string(j));
        if (static_cast<int>(P.members.size()) < p.L) out.push_back("merged part smaller than L");
    }
    // coverage: Info(F_j(v)) in v's Top part for top levels, Bottom part otherwise
    for (int v = 0; v < n; ++v)
        for (int j = 0; j <= h.top; ++j) {
            int f = h.at[v][j];
            if (f < 0) continue;
            Info want = fragment_info(g, tree, h, f);
            const auto& pcs = p.cls[f].top ? p.top[p.top_of[v]].pieces : p.bottom[p.bottom_of[v]].pieces;
            if (std::find(pcs.begin(), pcs.end(), want) == pcs.end())
                out.push_back("Info of level " + std::to_string(j) + " fragment of node " + std::to_string(g.ids[v]) +
                              " not stored in its part");
        }
    // red and blue fragments partition V
    std::vector<int> rb(n, 0);
    for (size_t f = 0; f < h.frags.size(); ++f)
        if (p.cls[f].color == Color::Red || p.cls[f].color == Color::Blue)
            for (int v : h.frags[f].members) ++rb[v];
    for (int v = 0; v < n; ++v)
        if (rb[v] != 1) out.push_back("red/blue fragments do not partition V at " + std::to_string(g.ids[v]));
    return out;
}

}  // namespace mstsim
