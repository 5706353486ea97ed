#include "mstsim/hierarchy.hpp"

#include <algorithm>
#include <set>

#include "mstsim/registers.hpp"

namespace mstsim {

int Hierarchy::tree_fragment() const {
    for (size_t i = 0; i < frags.size(); ++i)
        if (frags[i].level == top && frags[i].parent == -1) return static_cast<int>(i);
    return -1;
}

void Hierarchy::link(int n) {
    at.assign(n, std::vector<int>(top + 1, -1));
    for (size_t i = 0; i < frags.size(); ++i) {
        frags[i].parent = -1;
        frags[i].children.clear();
        for (int v : frags[i].members) at[v][frags[i].level] = static_cast<int>(i);
    }
    for (int v = 0; v < n; ++v) {
        int prev = -1;
        for (int j = 0; j <= top; ++j) {
            int f = at[v][j];
            if (f < 0) continue;
            if (prev >= 0 && frags[prev].parent == -1) {
                frags[prev].parent = f;
                frags[f].children.push_back(prev);
            }
            prev = f;
        }
    }
    for (auto& f : frags) {
        std::sort(f.children.begin(), f.children.end());
        f.children.erase(std::unique(f.children.begin(), f.children.end()), f.children.end());
    }
}

int fragment_root(const WeightedGraph& g, const ComponentMap& tree, const Fragment& f) {
    std::set<int> in(f.members.begin(), f.members.end());
    for (int v : f.members) {
        int p = tree.parent(g, v);
        if (p < 0 || !in.count(p)) return v;
    }
    return -1;
}

int min_outgoing_edge(const WeightedGraph& g, const std::vector<int>& members) {
    std::vector<char> in(g.n(), 0);
    for (int v : members) in[v] = 1;
    int best = -1;
    for (int v : members)
        for (auto& pt : g.adj[v])
            if (!in[pt.nbr] && (best < 0 || pt.w < g.edges[best].w)) best = pt.edge;
    return best;
}

namespace {
std::vector<int> tree_edges_inside(const WeightedGraph& g, const ComponentMap& tree, const std::vector<int>& members) {
    std::vector<char> in(g.n(), 0);
    for (int v : members) in[v] = 1;
    std::vector<int> out;
    for (int v : members) {
        int p = tree.parent(g, v);
        if (p >= 0 && in[p]) out.push_back(g.port(v, tree.parent_port[v]).edge);
    }
    std::sort(out.begin(), out.end());
    return out;
}
}  // namespace

std::vector<std::string> check_hierarchy(const WeightedGraph& g, const ComponentMap& tree, const Hierarchy& h) {
    std::vector<std::string> out;
    int n = g.n();
    auto name = [&](int i) {
        return "F(level " + std::to_string(h.frags[i].level) + ", size " + std::to_string(h.frags[i].members.size()) + ")";
    };
    if (h.top > std::max(0, ceil_log2(n))) out.push_back("height exceeds ceil(log n)");
    int t = h.tree_fragment();
    if (t < 0 || static_cast<int>(h.frags[t].members.size()) != n) out.push_back("T missing");
    for (int v = 0; v < n; ++v) {
        int f = h.at[v][0];
        if (f < 0 || h.frags[f].members.size() != 1) out.push_back("singleton missing for node " + std::to_string(g.ids[v]));
    }
    for (size_t i = 0; i < h.frags.size(); ++i) {
        auto& f = h.frags[i];
        if (f.members.size() < (std::size_t{1} << f.level)) out.push_back(name(i) + " smaller than 2^level");
        if (f.members.size() >= 2 && tree_edges_inside(g, tree, f.members).size() != f.members.size() - 1)
            out.push_back(name(i) + " not a subtree");
    }
    for (size_t a = 0; a < h.frags.size(); ++a)
        for (size_t b = a + 1; b < h.frags.size(); ++b) {
            auto& x = h.frags[a].members;
            auto& y = h.frags[b].members;
            std::vector<int> inter;
            std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(inter));
            if (inter.empty()) continue;
            if (inter.size() != x.size() && inter.size() != y.size()) out.push_back("not laminar: " + name(a) + " / " + name(b));
        }
    return out;
}

std::vector<std::string> check_candidates(const WeightedGraph& g, const ComponentMap& tree, const Hierarchy& h,
                                          bool require_minimum) {
    std::vector<std::string> out;
    for (size_t i = 0; i < h.frags.size(); ++i) {
        auto& f = h.frags[i];
        auto inside = tree_edges_inside(g, tree, f.members);
        std::set<int> fromdesc;
        for (size_t k = 0; k < h.frags.size(); ++k) {
            if (k == i) continue;
            auto& d = h.frags[k].members;
            if (d.size() >= f.members.size()) continue;
            if (!std::includes(f.members.begin(), f.members.end(), d.begin(), d.end())) continue;
            if (h.frags[k].cand >= 0) fromdesc.insert(h.frags[k].cand);
        }
        if (std::vector<int>(fromdesc.begin(), fromdesc.end()) != inside)
            out.push_back("candidate function fails at level " + std::to_string(f.level));
        if (static_cast<int>(i) != h.tree_fragment()) {
            if (f.cand < 0) out.push_back("missing candidate at level " + std::to_string(f.level));
            else if (require_minimum && f.cand != min_outgoing_edge(g, f.members))
                out.push_back("candidate not minimum at level " + std::to_string(f.level));
        }
    }
    return out;
}

}  // namespace mstsim
