#include "mstsim/alg.hpp"

#include <map>
#include <unordered_map>

namespace mstsim {

PhaseInfo phase_of(std::uint64_t round) {
    PhaseInfo p;
    if (round < 11) return p;
    int i = floor_log2(round / 11);
    std::uint64_t B = std::uint64_t{1} << i;
    p.i = i;
    p.B = B;
    p.off = round - 11 * B;
    return p;
}

AlgState alg_init(NodeId id) {
    AlgState s;
    s.est = id;
    return s;
}

void alg_visit(AlgState& s, RegVisitor& v, const std::string& pre) {
    const Dims& d = v.dims;
    v.u(pre + "parent", s.parent, d.port);
    v.u(pre + "pid", s.pid, d.id);
    v.u(pre + "round", s.round, d.time);
    v.flag(pre + "done", s.done);
    v.u(pre + "amask", s.amask, static_cast<unsigned>(d.maxlev + 1));
    v.u(pre + "ph", s.ph, d.lev);
    v.flag(pre + "cc", s.cc);
    v.flag(pre + "cp", s.cp);
    if (s.done) {
        v.u(pre + "nt", s.nt, d.cnt);
        v.u(pre + "tdone", s.tdone, d.time);
        v.u(pre + "top", s.top, d.lev);
        return;
    }
    v.u(pre + "level", s.level, d.lev);
    v.u(pre + "est", s.est, d.id);
    auto ph = phase_of(s.round);
    if (ph.i < 0) return;
    if (ph.off < 4 * ph.B) {
        v.flag(pre + "cw", s.cw);
        v.flag(pre + "ce", s.ce);
        v.flag(pre + "trunc", s.trunc);
        v.u(pre + "ttl", s.ttl, d.cnt);
        v.u(pre + "cnt", s.cnt, d.cnt);
    } else {
        v.flag(pre + "active", s.active);
        v.u(pre + "nt", s.nt, d.cnt);
        v.flag(pre + "fw", s.fw);
        v.flag(pre + "fe", s.fe);
        v.flag(pre + "fhas", s.fhas);
        v.flag(pre + "fown", s.fown);
        v.u(pre + "fwt", s.fwt, d.w);
        v.u(pre + "fport", s.fport, d.port);
        v.flag(pre + "pass", s.pass);
        v.flag(pre + "pivot", s.pivot);
    }
}

namespace {
bool has_cycle(const std::vector<AlgState>& st, const WeightedGraph& g) {
    int n = g.n();
    std::vector<char> color(n, 0);
    for (int s = 0; s < n; ++s) {
        if (color[s]) continue;
        std::vector<int> path;
        int v = s;
        while (v >= 0 && !color[v]) {
            color[v] = 1;
            path.push_back(v);
            int p = st[v].parent;
            v = (p >= 1 && p <= g.degree(v)) ? g.port(v, p).nbr : -1;
        }
        if (v >= 0 && color[v] == 1) return true;
        for (int x : path) color[x] = 2;
    }
    return false;
}
}  // namespace

void HierarchyRecorder::observe(const std::vector<AlgState>& st) {
    if (st.empty()) return;
    auto r = st[0].round;
    bool all_done = true;
    for (auto& s : st) all_done = all_done && s.done;
    if (all_done) {
        prev_ = st;
        return;
    }
    if (has_cycle(st, g_)) problems.push_back("parent cycle at round " + std::to_string(r));
    auto ph = phase_of(r);
    if (ph.i >= 0 && !prev_.empty()) {
        int roots = 0, proots = 0;
        for (size_t v = 0; v < st.size(); ++v) {
            roots += st[v].parent == 0;
            proots += prev_[v].parent == 0;
            if (ph.off > 6 * ph.B && ph.off < 8 * ph.B && st[v].est != prev_[v].est && !st[v].done)
                problems.push_back("root estimate changed during search at round " + std::to_string(r));
        }
        if (roots < proots && ph.off != 11 * ph.B - 1)
            problems.push_back("hook outside the hooking round at round " + std::to_string(r));
    }
    if (ph.i >= 0 && ph.off == 8 * ph.B - 1) {
        std::map<NodeId, std::vector<int>> groups;
        for (size_t v = 0; v < st.size(); ++v)
            if (st[v].fw && !st[v].done) groups[st[v].est].push_back(static_cast<int>(v));
        std::unordered_map<Weight, int> by_w;
        for (int e = 0; e < g_.m(); ++e) by_w[g_.edges[e].w] = e;
        for (auto& [est, mem] : groups) {
            Fragment f;
            f.level = ph.i;
            f.members = mem;
            f.alg_root = est;
            int r0 = g_.index_of(est);
            if (r0 >= 0 && st[r0].fhas) {
                auto it = by_w.find(st[r0].fwt);
                f.cand = it == by_w.end() ? -1 : it->second;
            }
            frags_.push_back(std::move(f));
        }
    }
    prev_ = st;
}

Hierarchy HierarchyRecorder::finish(int top) const {
    Hierarchy h;
    h.frags = frags_;
    h.top = top;
    h.link(g_.n());
    return h;
}

AlgResult run_alg(const WeightedGraph& g, TraceLevel lvl) {
    if (!weights_distinct(g)) throw Error("precondition-violation", "edge weights are not distinct");
    Simulator<AlgProgram> sim(g, AlgProgram{}, Scheduler{}, {}, lvl);
    HierarchyRecorder rec(g);
    sim.on_unit = [&](Simulator<AlgProgram>& s) { rec.observe(s.states); };
    std::uint64_t horizon = 64ull * g.n() + 64;
    sim.run(horizon, [](Simulator<AlgProgram>& s) {
        for (auto& x : s.states)
            if (!x.done) return false;
        return true;
    });
    AlgResult res;
    res.tree.parent_port.resize(g.n());
    int top = 0;
    for (int v = 0; v < g.n(); ++v) {
        res.tree.parent_port[v] = sim.states[v].parent;
        if (sim.states[v].done) {
            res.rounds = sim.states[v].tdone;
            top = sim.states[v].top;
        } else {
            res.problems.push_back("node " + std::to_string(g.ids[v]) + " did not terminate");
        }
    }
    res.all_done = sim.time;
    res.hier = rec.finish(top);
    res.peak_bits = sim.peak_bits;
    res.id_bits = sim.dims.id;
    res.trace = std::move(sim.trace);
    res.problems.insert(res.problems.end(), rec.problems.begin(), rec.problems.end());
    return res;
}

}  // namespace mstsim
