#include "mstsim/harness.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

namespace mstsim {

namespace {

const VerifyState& absent_verifier() {
    static const VerifyState s = [] {
        VerifyState x;
        x.ready = false;
        return x;
    }();
    return s;
}

std::uint64_t max_value(unsigned width) { return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1; }

bool finished(const ConstructState& c) { return construct_finished(c); }

// Port registers inside the degree and label strings of the marker's length once it started.
bool construct_sane(const ConstructState& c, std::uint64_t pulse, int deg) {
    const auto& a = c.alg;
    if (a.round != pulse) return false;
    if (a.parent < 0 || a.parent > deg || a.fport < 0 || a.fport > deg) return false;
    if (!a.done) return true;
    if (a.nt < 1 || a.top != floor_log2(a.nt)) return false;
    if (a.round < marker_origin(a)) return true;
    const auto len = static_cast<size_t>(a.top) + 1;
    const auto& b = c.mk.b;
    if (b.roots.size() != len || b.endp.size() != len || b.parents.size() != len || b.agg.size() != len ||
        c.mk.topbits.size() != len)
        return false;
    for (const auto& d : c.mk.dfs)
        if (d.dport < 0 || d.dport > deg) return false;
    return true;
}

}  // namespace

void harness_visit(HarnessState& s, RegVisitor& v) {
    v.num("epoch", s.epoch, v.dims.cnt);
    v.flag("verify", s.verify);
    if (s.verify) {
        verify_visit(s.vs, v, "v.");
        return;
    }
    v.num("pulse", s.pulse, v.dims.time);
    construct_visit(s.cur, v);
    construct_visit(s.prev, v);
}

HarnessState harness_fresh(NodeId id, std::uint64_t epoch) {
    HarnessState s;
    s.epoch = epoch;
    s.cur.alg = alg_init(id);
    s.prev = s.cur;
    s.vs.ready = false;
    return s;
}

void HarnessProgram::step(const StepCtx& ctx, const HarnessState& s, const NbrView<HarnessState>& nb,
                          HarnessState& o) const {
    const int deg = ctx.degree();
    const std::uint64_t emax = max_value(ctx.dims.cnt);
    auto reset = [&](std::uint64_t e) {
        o = harness_fresh(ctx.id, e);
        if (log) log->resets.push_back({ctx.t, ctx.v});
        ctx.emit("reset", "epoch=" + std::to_string(e));
    };
    auto raise = [&](const std::string& why) {
        ctx.trace.add(ctx.t, ctx.id, "alarm", "check=sanity " + why);
        std::uint64_t e = std::min(emax, s.epoch + 1);
        if (log) log->raises.push_back({ctx.t, e});
        reset(e);
    };

    std::uint64_t top = s.epoch;
    for (int p = 1; p <= deg; ++p) top = std::max(top, nb[p].epoch);
    if (top > s.epoch) return reset(top);
    if (s.epoch > emax) return raise("epoch");

    // a same-epoch neighbour restarted from scratch: follow unless it can still be waiting on us
    for (int p = 1; p <= deg; ++p) {
        const auto& u = nb[p];
        if (u.epoch == s.epoch && !u.verify && u.pulse == 0 && (s.verify || s.pulse >= 2)) return reset(s.epoch);
    }

    if (s.verify) {
        if (s.vs.alarm) {
            std::uint64_t e = std::min(emax, s.epoch + 1);
            if (log) log->raises.push_back({ctx.t, e});
            return reset(e);
        }
        if (!s.vs.ready) return raise("ready");
        for (int p = 1; p <= deg; ++p) {
            const auto& u = nb[p];
            if (u.epoch == s.epoch && !u.verify && !finished(u.cur)) return raise("mode");
        }
        auto get = [&](int p) -> const VerifyState& {
            const auto& u = nb[p];
            return u.epoch == s.epoch && u.verify ? u.vs : absent_verifier();
        };
        verify_step(ctx, s.vs, VNbrs::of(get), o.vs, VerifierOptions{async});
        return;
    }

    if (s.pulse >= max_value(ctx.dims.time)) return raise("pulse");
    if (!construct_sane(s.cur, s.pulse, deg) || (s.pulse > 0 && s.prev.alg.round + 1 != s.pulse))
        return raise("construct");
    const bool fin = finished(s.cur);
    bool all_same = true, can_step = true, can_switch = fin;
    for (int p = 1; p <= deg; ++p) {
        const auto& u = nb[p];
        if (u.epoch != s.epoch) {
            all_same = false;
            continue;
        }
        if (u.verify) {
            if (!fin) return raise("mode");
            continue;
        }
        if (u.pulse + 1 < s.pulse || u.pulse > s.pulse + 1) return raise("pulse gap");
        if (fin && u.pulse > s.pulse) return raise("pulse gap");
        if (u.pulse < s.pulse) can_step = false;
        if (u.pulse != s.pulse || !finished(u.cur)) can_switch = false;
    }
    if (!all_same) return;
    if (fin) {
        if (!can_switch) return;
        o.verify = true;
        o.vs = verify_init(s.cur.alg.parent, s.cur.mk.b);
        o.cur = o.prev = ConstructState{};
        o.pulse = 0;
        ctx.emit("verify-start", "epoch=" + std::to_string(s.epoch));
        return;
    }
    if (!can_step) return;
    auto get = [&](int p) -> const ConstructState& {
        const auto& u = nb[p];
        return u.pulse == s.pulse ? u.cur : u.prev;
    };
    o.prev = s.cur;
    construct_step(ctx, s.cur, CNbrs::of(get), o.cur);
    o.pulse = s.pulse + 1;
}

bool legal(const WeightedGraph& g, const std::vector<HarnessState>& st, const std::vector<int>& mst) {
    ComponentMap c;
    c.parent_port.resize(g.n());
    for (int v = 0; v < g.n(); ++v) {
        const auto& x = st[v];
        if (!x.verify || x.vs.alarm || !x.vs.ready || x.epoch != st[0].epoch) return false;
        if (x.vs.parent < 0 || x.vs.parent > g.degree(v)) return false;
        c.parent_port[v] = x.vs.parent;
    }
    auto es = subgraph_edges(g, c);
    std::sort(es.begin(), es.end());
    return es == mst && is_spanning_tree(g, c);
}

std::string Verdict::to_json() const {
    nlohmann::json j;
    j["converged"] = converged;
    j["convergence_time"] = convergence_time;
    j["initial_convergence"] = initial_convergence;
    j["resets"] = resets;
    j["detection_times"] = detection_times;
    j["detection_distances"] = detection_distances;
    j["reconvergence_times"] = reconvergence_times;
    j["peak_bits"] = peak_bits;
    j["closure_breaks"] = closure_breaks;
    j["tree_ok"] = tree_ok;
    j["end_time"] = end_time;
    return j.dump();
}

Verdict run_selfstab(const WeightedGraph& g, const SelfstabConfig& cfg, Trace* trace_out, TraceLevel lvl) {
    const auto n = static_cast<std::uint64_t>(g.n());
    auto tm = train_timing(n, cfg.async);
    const std::uint64_t settle = cfg.settle ? cfg.settle : 2 * tm.idle;
    const std::uint64_t horizon = cfg.horizon ? cfg.horizon : (400 * n + 8 * settle) * (1 + cfg.post_faults);
    auto mst = kruskal_oracle(g);
    std::sort(mst.begin(), mst.end());

    HarnessLog log;
    Scheduler sc{cfg.async ? SchedMode::Async : SchedMode::Sync, cfg.seed, cfg.fairness};
    Simulator<HarnessProgram> sim(g, HarnessProgram{cfg.async, &log}, sc, cfg.faults, lvl);
    sim.budget = cfg.budget_bits;
    std::mt19937_64 rng(cfg.seed * 104729 + 3);
    if (cfg.randomize_init)
        for (int v = 0; v < g.n(); ++v) {
            Randomizer r(sim.dims, rng);
            sim.prog.visit(sim.states[v], r);
        }

    std::vector<std::uint64_t> fault_times;
    std::vector<std::vector<int>> fault_nodes;
    for (const auto& f : cfg.faults) {
        fault_times.push_back(f.time);
        fault_nodes.push_back({g.index_of(f.node)});
    }
    std::vector<char> post(fault_times.size(), 0);
    std::uint64_t last_fault = fault_times.empty() ? 0 : *std::max_element(fault_times.begin(), fault_times.end());
    std::uint64_t legal_since = 0;
    bool is_legal = false;
    int posted = 0;
    std::vector<std::uint64_t> post_times;
    Verdict vd;
    bool pending = false;
    auto check = [&](Simulator<HarnessProgram>& s) {
        bool now = legal(g, s.states, mst);
        if (now && !is_legal) {
            legal_since = s.time;
            if (!vd.initial_convergence) vd.initial_convergence = s.time;
            if (pending) vd.reconvergence_times.push_back(s.time - post_times.back());
            pending = false;
        }
        if (!now && is_legal) ++vd.closure_breaks;
        is_legal = now;
        bool quiet = s.faults.empty() && s.time >= last_fault;
        if (quiet && now && posted < cfg.post_faults && s.time - legal_since >= settle) {
            int v = static_cast<int>(rng() % g.n());
            FaultEvent f;
            f.time = s.time;
            f.node = g.ids[v];
            s.inject(f);
            fault_times.push_back(s.time);
            fault_nodes.push_back({v});
            post.push_back(1);
            post_times.push_back(s.time);
            last_fault = s.time;
            ++posted;
            pending = true;
            is_legal = legal(g, s.states, mst);
            if (is_legal) legal_since = s.time;
            return false;
        }
        return quiet && now && posted >= cfg.post_faults && s.time - legal_since >= settle;
    };
    if (cfg.randomize_init || !cfg.faults.empty() || cfg.post_faults) {
        is_legal = legal(g, sim.states, mst);
    }
    sim.run(horizon, check);

    vd.end_time = sim.time;
    vd.peak_bits = sim.peak_bits;
    vd.tree_ok = is_legal;
    vd.converged = is_legal && sim.time - legal_since >= std::min(settle, horizon) && posted >= cfg.post_faults;
    vd.convergence_time = is_legal ? (legal_since > last_fault ? legal_since - last_fault : 0) : 0;
    std::set<std::uint64_t> epochs;
    for (auto& r : log.raises) epochs.insert(r.second);
    vd.resets = epochs.size();

    // detection per fault that hit a legal system: the first alarm or reset after it
    for (size_t i = 0; i < fault_times.size(); ++i) {
        if (!post[i]) continue;
        const std::uint64_t tf = fault_times[i];
        std::uint64_t first = ~std::uint64_t{0};
        for (auto* e : sim.trace.of_kind("alarm"))
            if (e->t > tf) first = std::min(first, e->t);
        for (auto& [t, v] : log.resets)
            if (t > tf) first = std::min(first, t);
        if (first == ~std::uint64_t{0}) continue;
        std::vector<int> who;
        for (auto* e : sim.trace.of_kind("alarm"))
            if (e->t == first) who.push_back(g.index_of(e->node));
        for (auto& [t, v] : log.resets)
            if (t == first) who.push_back(v);
        auto dist = bfs_distances(g, who);
        std::uint64_t far = 0;
        for (int x : fault_nodes[i]) far = std::max<std::uint64_t>(far, dist[x]);
        vd.detection_times.push_back(first - tf);
        vd.detection_distances.push_back(far);
    }
    if (trace_out) *trace_out = std::move(sim.trace);
    return vd;
}

}  // namespace mstsim
