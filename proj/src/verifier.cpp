#include "mstsim/verifier.hpp"

#include <algorithm>
#include <map>
#include <queue>

#include "mstsim/alg.hpp"

namespace mstsim {

namespace {

std::string lev_str(int j) { return "level=" + std::to_string(j); }

}  // namespace

void monitor_step(const StepCtx& ctx, int side, const VerifyState& s, VerifyState& o, bool arrived,
                  const TrainTiming& tm) {
    Monitor& m = o.mon[side];
    if (!arrived) {
        m.idle = s.mon[side].idle + 1;
        if (m.idle > tm.idle) raise_alarm(ctx, o, Alarm::Timeout, side ? "bottom" : "top");
        return;
    }
    m.idle = 0;
    const Car& c = o.tr[side].bx;
    auto J = expected_levels(s.b, side);
    if (!m.seen || c.e != m.e) {
        if (m.armed)
            for (int j : J)
                if (j > m.lv) {
                    raise_alarm(ctx, o, Alarm::CycleSet, "missing " + lev_str(j));
                    break;
                }
        m.armed = m.seen;
        m.seen = true;
        m.e = c.e;
        m.lv = -1;
    }
    if (!c.x.present) return;
    if (!relevant(s.b, side, c)) {
        if (side == 1 && c.flag) raise_alarm(ctx, o, Alarm::CycleSet, "flag on " + lev_str(c.x.lev));
        return;
    }
    int j = static_cast<int>(c.x.lev);
    if (m.lv >= 0 && j <= m.lv) {
        raise_alarm(ctx, o, Alarm::CycleSet, "order " + lev_str(j));
    } else if (m.armed) {
        for (int k : J)
            if (k > m.lv && k < j) {
                raise_alarm(ctx, o, Alarm::CycleSet, "missing " + lev_str(k));
                break;
            }
    }
    m.lv = j;
}

namespace {

// Every scratch register within the range the protocol itself can produce.
bool in_range(const VerifyState& s, int deg, const TrainTiming& tm) {
    const int ell = static_cast<int>(s.b.roots.size()) - 1;
    for (int k = 0; k < 2; ++k) {
        const auto& t = s.tr[k];
        const auto& m = s.mon[k];
        if (t.ph > 4 || t.cp < 0 || t.cp > deg || t.tick > tm.restart + 1) return false;
        if (m.lv > ell || m.idle > tm.idle + 1) return false;
    }
    const auto& c = s.cmp;
    if (c.aj > ell || c.last > ell || c.timer > tm.window || c.cur < 0 || c.cur > deg + 1) return false;
    if (c.keep && c.klev > ell) return false;
    return true;
}

}  // namespace

void verify_step(const StepCtx& ctx, const VerifyState& s, const VNbrs& nb, VerifyState& o,
                 const VerifierOptions& opt) {
    if (!s.ready) return;
    const int deg = ctx.degree();
    const NodeId me = ctx.id;
    bool all_ready = true;
    for (int p = 1; p <= deg; ++p) all_ready = all_ready && nb[p].ready;

    if (opt.structural && all_ready && !s.alarm) {
        LocalView x{ctx.g, ctx.v, s.parent, s.b, [&](int p) -> const LabelBundle& { return nb[p].b; }};
        auto vs = verify_structure(x);
        if (!vs.empty()) raise_alarm(ctx, o, alarm_of_check(vs[0].check), vs[0].check);
    }
    if (s.parent < 0 || s.parent > deg) {
        raise_alarm(ctx, o, Alarm::Sp, "parent port");
        return;
    }

    // partition existence: a part root names itself, every other node agrees with its parent
    if (s.b.jdelim < 0 || s.b.jdelim > static_cast<int>(s.b.roots.size()))
        raise_alarm(ctx, o, Alarm::Partition, "jdelim");
    for (int side = 0; side < 2; ++side) {
        NodeId pr = part_root(s.b, side);
        if (pr == me) {
            const Info* pcs = side ? s.b.pb : s.b.pt;
            if (!pcs[0].present && !expected_levels(s.b, side).empty())
                raise_alarm(ctx, o, Alarm::Partition, "empty part root");
        } else if (!s.parent) {
            raise_alarm(ctx, o, Alarm::Partition, "part root");
        } else if (nb[s.parent].ready && part_root(nb[s.parent].b, side) != pr) {
            raise_alarm(ctx, o, Alarm::Partition, "part root");
        }
    }

    const TrainTiming tm = train_timing(s.b.numk_n, opt.async);
    if (!in_range(s, deg, tm)) raise_alarm(ctx, o, Alarm::Budget, "register range");
    bool hold = false;
    if (opt.async && s.cmp.shown) {
        for (int p = 1; p <= deg && !hold; ++p) {
            const auto& w = nb[p];
            hold = w.ready && w.cmp.keep && w.cmp.kid == me && w.cmp.klev == static_cast<int>(s.cmp.show.lev);
        }
    }
    bool arr[2];
    arr[0] = train_step(ctx, 0, s, nb, o, tm, hold);
    // at most one new relevant piece per activation, so the Show server misses none
    bool busy = opt.async && arr[0] && relevant(s.b, 0, o.tr[0].bx);
    arr[1] = train_step(ctx, 1, s, nb, o, tm, hold || busy);
    for (int side = 0; side < 2; ++side) {
        monitor_step(ctx, side, s, o, arr[side], tm);
        if (opt.async && arr[side] && relevant(s.b, side, o.tr[side].bx)) {
            o.cmp.show = o.tr[side].bx.x;
            o.cmp.shown = true;
        }
    }
    compare_step(ctx, s, nb, o, tm, TrainParams{opt.async, opt.on_event});
}

std::vector<VerifyState> verifier_start(const WeightedGraph& g, const ComponentMap& tree,
                                        const std::vector<LabelBundle>& b) {
    std::vector<VerifyState> out;
    for (int v = 0; v < g.n(); ++v) out.push_back(verify_init(tree.parent_port[v], b[v]));
    return out;
}

Certified certify(const WeightedGraph& g) {
    auto r = run_alg(g, TraceLevel::Off);
    if (!r.problems.empty()) throw Error("construction-failed", r.problems.front());
    Certified c;
    c.tree = r.tree;
    c.hier = r.hier;
    c.bundles = mark_all(g, c.tree, c.hier);
    return c;
}


Detection measure_detection(const WeightedGraph& g, const Trace& t, std::uint64_t fault_time,
                            const std::vector<int>& fault_nodes) {
    Detection d;
    std::vector<int> alarmed;
    for (auto* e : t.of_kind("alarm")) {
        if (e->t <= fault_time) continue;
        int v = g.index_of(e->node);
        if (!d.detected) {
            d.detected = true;
            d.time = e->t - fault_time;
        }
        if (std::find(alarmed.begin(), alarmed.end(), v) == alarmed.end()) {
            alarmed.push_back(v);
            d.alarmed.push_back(e->node);
        }
    }
    if (!d.detected) return d;
    auto da = bfs_distances(g, alarmed);
    for (int x : fault_nodes) d.distance = std::max<std::uint64_t>(d.distance, static_cast<std::uint64_t>(da[x]));
    return d;
}

std::vector<char> fault_region(const WeightedGraph& g, const std::vector<LabelBundle>& b,
                               const std::vector<int>& fault_nodes) {
    std::map<NodeId, std::vector<int>> top, bot;
    for (int v = 0; v < g.n(); ++v) {
        top[b[v].toproot].push_back(v);
        bot[b[v].botroot].push_back(v);
    }
    std::vector<char> in(g.n(), 0);
    auto add_parts = [&](int u) {
        for (int v : top[b[u].toproot]) in[v] = 1;
        for (int v : bot[b[u].botroot]) in[v] = 1;
    };
    for (int x : fault_nodes) {
        add_parts(x);
        for (auto& p : g.adj[x]) add_parts(p.nbr);
    }
    std::vector<char> out = in;
    for (int v = 0; v < g.n(); ++v)
        if (in[v])
            for (auto& p : g.adj[v]) out[p.nbr] = 1;
    return out;
}

void full_visit(FullState& s, RegVisitor& v) {
    v.flag("ready", s.ready);
    v.u("parent", s.parent, v.dims.port);
    visit_bundle(s.b, v);
    for (size_t j = 0; j < s.all.size(); ++j) v.info("INFO" + std::to_string(j), s.all[j]);
    v.flag("alarm", s.alarm);
    v.u("alarm.code", s.code, 4);
}

void FullProgram::step(const StepCtx& ctx, const FullState& s, const NbrView<FullState>& nb, FullState& o) const {
    if (!s.ready || s.alarm) return;
    const int deg = ctx.degree();
    const NodeId me = ctx.id;
    auto raise = [&](Alarm a, const std::string& d) {
        if (o.alarm) return;
        o.alarm = true;
        o.code = a;
        ctx.emit("alarm", "check=" + to_string(a) + " " + d);
    };
    for (int p = 1; p <= deg; ++p)
        if (!nb[p].ready) return;
    LocalView x{ctx.g, ctx.v, s.parent, s.b, [&](int p) -> const LabelBundle& { return nb[p].b; }};
    auto vs = verify_structure(x);
    if (!vs.empty()) {
        raise(alarm_of_check(vs[0].check), vs[0].check);
        return;
    }
    const int ell = static_cast<int>(s.b.roots.size()) - 1;
    if (static_cast<int>(s.all.size()) != ell + 1) {
        raise(Alarm::CycleSet, "info count");
        return;
    }
    for (int j = 0; j <= ell; ++j) {
        char r = s.b.roots[j];
        const Info& a = s.all[j];
        if (r == '*') {
            if (a.present) raise(Alarm::CycleSet, "stray " + lev_str(j));
            continue;
        }
        if (!a.present || static_cast<int>(a.lev) != j) {
            raise(Alarm::CycleSet, "missing " + lev_str(j));
            continue;
        }
        if (r == '1' && a.z != me) raise(Alarm::RootId, lev_str(j));
        if ((j == ell) != (a.w == kInfWeight)) raise(Alarm::C1, lev_str(j) + " weight sentinel");
        int cand = 0;
        char e = s.b.endp[j];
        if (e == 'u') cand = s.parent;
        for (int p = 1; p <= deg && e == 'd' && !cand; ++p)
            if (p != s.parent && nb[p].b.pid == me && j < static_cast<int>(nb[p].b.parents.size()) &&
                nb[p].b.parents[j] == '1')
                cand = p;
        for (int p = 1; p <= deg; ++p) {
            const auto& u = nb[p];
            const Info* su = nullptr;
            if (roots_at(u.b, j) != '*' && j < static_cast<int>(u.all.size())) su = &u.all[j];
            Alarm al = edge_check(ctx, s.parent, r, cand, a, p, su);
            if (al != Alarm::None) raise(al, lev_str(j) + " port=" + std::to_string(p));
        }
    }
}

std::vector<FullState> full_start(const WeightedGraph& g, const ComponentMap& tree, const Hierarchy& h,
                                  const std::vector<LabelBundle>& b) {
    std::vector<FullState> out(g.n());
    for (int v = 0; v < g.n(); ++v) {
        auto& s = out[v];
        s.parent = tree.parent_port[v];
        s.b = b[v];
        s.b.toproot = s.b.botroot = 0;
        s.b.jdelim = 0;
        s.b.pt[0] = s.b.pt[1] = s.b.pb[0] = s.b.pb[1] = Info{};
        s.all.assign(h.top + 1, Info{});
        for (int j = 0; j <= h.top; ++j)
            if (h.at[v][j] >= 0) s.all[j] = fragment_info(g, tree, h, h.at[v][j]);
    }
    return out;
}

}  // namespace mstsim

namespace mstsim {

const std::vector<Corruption>& all_corruptions() {
    static const std::vector<Corruption> all = {Corruption::NonMinimal, Corruption::NonTree, Corruption::Strings,
                                                Corruption::Pieces,     Corruption::Erased,  Corruption::PartRoot,
                                                Corruption::Trains};
    return all;
}

std::string to_string(Corruption k) {
    switch (k) {
        case Corruption::NonMinimal: return "non-minimal";
        case Corruption::NonTree: return "non-tree";
        case Corruption::Strings: return "strings";
        case Corruption::Pieces: return "pieces";
        case Corruption::Erased: return "erased";
        case Corruption::PartRoot: return "part-root";
        case Corruption::Trains: return "trains";
    }
    return "?";
}

Corruption parse_corruption(const std::string& s) {
    for (auto k : all_corruptions())
        if (to_string(k) == s) return k;
    throw Error("invalid-parameter", "unknown corruption " + s);
}

Certified nonminimal_certificate(const WeightedGraph& g) {
    auto te = kruskal_oracle(g);
    std::vector<char> in(g.m(), 0);
    for (int e : te) in[e] = 1;
    int f = -1;
    for (int e = 0; e < g.m() && f < 0; ++e)
        if (!in[e]) f = e;
    if (f < 0) throw Error("invalid-parameter", "graph is a tree");
    // heaviest tree edge on the cycle closed by f
    auto tree = orient_tree(g, te, g.edges[f].a);
    int heavy = -1;
    for (int v = g.edges[f].b; tree.parent_port[v]; v = g.port(v, tree.parent_port[v]).nbr) {
        int e = g.port(v, tree.parent_port[v]).edge;
        if (heavy < 0 || g.edges[e].w > g.edges[heavy].w) heavy = e;
    }
    WeightedGraph g2 = g;
    std::swap(g2.edges[f].w, g2.edges[heavy].w);
    for (int v = 0; v < g2.n(); ++v)
        for (auto& p : g2.adj[v]) p.w = g2.edges[p.edge].w;
    auto r = run_alg(g2, TraceLevel::Off);
    if (!r.problems.empty()) throw Error("construction-failed", r.problems.front());
    Certified c;
    c.tree = r.tree;
    c.hier = r.hier;
    c.bundles = mark_all(g, c.tree, c.hier);
    return c;
}

std::vector<int> corrupt(Corruption k, const WeightedGraph& g, std::vector<VerifyState>& st, std::mt19937_64& rng,
                         int count) {
    const Dims d = Dims::of(g);
    std::vector<int> cand;
    for (int v = 0; v < g.n(); ++v) {
        const auto& b = st[v].b;
        bool has_piece = b.pt[0].present || b.pt[1].present || b.pb[0].present || b.pb[1].present;
        bool has_kid = false;
        for (int p = 1; p <= g.degree(v); ++p) {
            int u = g.port(v, p).nbr;
            has_kid = has_kid || (st[u].parent && g.port(u, st[u].parent).nbr == v);
        }
        bool ok = true;
        if (k == Corruption::NonTree) ok = has_kid;
        if (k == Corruption::Pieces || k == Corruption::Erased) ok = has_piece;
        if (k == Corruption::PartRoot) ok = g.n() > 1;
        if (ok) cand.push_back(v);
    }
    std::shuffle(cand.begin(), cand.end(), rng);
    if (static_cast<int>(cand.size()) > count) cand.resize(count);
    auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
    for (int v : cand) {
        auto& s = st[v];
        auto& b = s.b;
        switch (k) {
            case Corruption::NonMinimal:
                throw Error("invalid-parameter", "non-minimal is a certificate, not an in-place corruption");
            case Corruption::NonTree: {
                for (int p = 1; p <= g.degree(v); ++p) {
                    int u = g.port(v, p).nbr;
                    if (st[u].parent && g.port(u, st[u].parent).nbr == v) {
                        s.parent = p;  // v and its child now point at each other
                        break;
                    }
                }
                break;
            }
            case Corruption::Strings: {
                int which = pick(3);
                std::string& str = which == 0 ? b.roots : which == 1 ? b.endp : b.parents;
                std::string alpha = which == 0 ? kRootsAlphabet : which == 1 ? kEndpAlphabet : kBitAlphabet;
                if (str.empty()) break;
                int j = pick(static_cast<int>(str.size()));
                alpha.erase(alpha.find(str[j]), 1);
                str[j] = alpha[pick(static_cast<int>(alpha.size()))];
                break;
            }
            case Corruption::Pieces:
            case Corruption::Erased: {
                std::vector<Info*> ps;
                for (Info* x : {&b.pt[0], &b.pt[1], &b.pb[0], &b.pb[1]})
                    if (x->present) ps.push_back(x);
                Info& x = *ps[pick(static_cast<int>(ps.size()))];
                if (k == Corruption::Erased) {
                    x = Info{};
                    break;
                }
                int field = pick(3);
                if (field == 0) x.z ^= std::uint64_t{1} << pick(static_cast<int>(d.id));
                if (field == 1) x.lev ^= 1u << pick(static_cast<int>(d.lev));
                if (field == 2) {
                    if (x.w == kInfWeight) x.w = rng() % (g.max_weight() + 1);
                    else x.w ^= std::uint64_t{1} << pick(static_cast<int>(d.w - 1));
                }
                break;
            }
            case Corruption::PartRoot: {
                NodeId& r = pick(2) ? b.botroot : b.toproot;
                NodeId old = r;
                while (r == old) r = g.ids[pick(g.n())];
                break;
            }
            case Corruption::Trains: {
                VerifyState t = s;
                Randomizer rz(d, rng);
                verify_visit(t, rz);
                s.tr[0] = t.tr[0];
                s.tr[1] = t.tr[1];
                s.mon[0] = t.mon[0];
                s.mon[1] = t.mon[1];
                s.cmp = t.cmp;
                break;
            }
        }
    }
    return cand;
}

DetectRun detect_run(const WeightedGraph& g, const Certified& c, Corruption k, bool async, std::uint64_t seed,
                     int count, std::uint64_t horizon) {
    VerifierProgram prog{verifier_start(g, c.tree, c.bundles), {async}};
    Simulator<VerifierProgram> sim(g, prog, Scheduler{async ? SchedMode::Async : SchedMode::Sync, seed}, {},
                                   TraceLevel::Off);
    sim.track_memory = false;
    std::mt19937_64 rng(seed * 7919 + 17);
    DetectRun r;
    auto tm = train_timing(g.n(), async);
    if (k != Corruption::NonMinimal) {
        sim.run(2 * tm.cycle);
        r.clean_before = sim.trace.of_kind("alarm").empty();
        r.fault_time = sim.time;
        r.nodes = corrupt(k, g, sim.states, rng, count);
        for (int v : r.nodes) sim.trace.add(sim.time, g.ids[v], "fault", to_string(k));
    }
    std::uint64_t first = 0;
    sim.run(horizon, [&](Simulator<VerifierProgram>& s) {
        if (!first && !s.trace.of_kind("alarm").empty()) first = s.time;
        // keep going for one more train timeout to collect the alarm set
        return first && s.time >= first + tm.idle;
    });
    r.d = measure_detection(g, sim.trace, r.fault_time, r.nodes);
    if (!r.nodes.empty()) {
        auto region = fault_region(g, c.bundles, r.nodes);
        for (NodeId id : r.d.alarmed) r.local = r.local && region[g.index_of(id)];
    }
    return r;
}

std::uint64_t compare_completion(const WeightedGraph& g, const Certified& c, bool async, std::uint64_t seed,
                                 std::uint64_t horizon) {
    std::vector<std::vector<std::vector<char>>> need(g.n());
    std::uint64_t left = 0;
    for (int v = 0; v < g.n(); ++v) {
        const auto& b = c.bundles[v];
        need[v].assign(g.degree(v) + 1, std::vector<char>(b.roots.size(), 0));
        for (int side = 0; side < 2; ++side)
            for (int j : expected_levels(b, side))
                for (int p = 1; p <= g.degree(v); ++p) {
                    need[v][p][j] = 1;
                    ++left;
                }
    }
    EventFn fn = [&](std::uint64_t, int v, int p, int j) {
        if (j < static_cast<int>(need[v][p].size()) && need[v][p][j]) {
            need[v][p][j] = 0;
            --left;
        }
    };
    VerifierProgram prog{verifier_start(g, c.tree, c.bundles), {async, true, &fn}};
    Simulator<VerifierProgram> sim(g, prog, Scheduler{async ? SchedMode::Async : SchedMode::Sync, seed}, {},
                                   TraceLevel::Off);
    sim.track_memory = false;
    sim.run(horizon, [&](Simulator<VerifierProgram>&) { return left == 0; });
    return left == 0 ? sim.time : 0;
}

std::uint64_t train_delivery(const WeightedGraph& g, const Certified& c, bool async, std::uint64_t seed,
                             std::uint64_t skip, std::uint64_t horizon) {
    std::map<std::pair<int, NodeId>, int> items;  // pieces per part plus the header
    for (int side = 0; side < 2; ++side)
        for (int v = 0; v < g.n(); ++v) {
            const auto& b = c.bundles[v];
            auto& n = items[{side, part_root(b, side)}];
            if (n == 0) n = 1;
            const Info* pcs = side ? b.pb : b.pt;
            n += pcs[0].present + pcs[1].present;
        }
    std::map<std::pair<int, NodeId>, std::map<int, std::uint64_t>> started;
    std::vector<int> cnt[2], ep[2];
    for (auto& x : cnt) x.assign(g.n(), 0);
    for (auto& x : ep) x.assign(g.n(), -1);
    std::uint64_t worst = 0;
    std::vector<char> full[2] = {std::vector<char>(g.n(), 0), std::vector<char>(g.n(), 0)};
    VerifierProgram prog{verifier_start(g, c.tree, c.bundles), {async}};
    Simulator<VerifierProgram> sim(g, prog, Scheduler{async ? SchedMode::Async : SchedMode::Sync, seed}, {},
                                   TraceLevel::Off);
    sim.track_memory = false;
    std::vector<VerifyState> prev = sim.states;
    sim.on_unit = [&](Simulator<VerifierProgram>& s) {
        for (int v = 0; v < g.n(); ++v)
            for (int side = 0; side < 2; ++side) {
                const Car& bx = s.states[v].tr[side].bx;
                if (bx.b == prev[v].tr[side].bx.b) continue;
                std::pair<int, NodeId> key{side, part_root(c.bundles[v], side)};
                if (bx.e != ep[side][v]) {
                    ep[side][v] = bx.e;
                    cnt[side][v] = 0;
                    if (key.second == g.ids[v]) started[key][bx.e] = s.time;
                }
                if (++cnt[side][v] == items[key]) {
                    auto it = started[key].find(bx.e);
                    if (it != started[key].end() && it->second >= skip) {
                        worst = std::max(worst, s.time - it->second + 1);
                        full[side][v] = 1;
                    }
                }
            }
        prev = s.states;
    };
    sim.run(horizon);
    for (auto& f : full)
        if (std::count(f.begin(), f.end(), 0)) return 0;
    return worst;
}

}  // namespace mstsim
