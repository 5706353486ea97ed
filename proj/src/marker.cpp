#include "mstsim/marker.hpp"

#include <algorithm>
#include <map>
#include <mutex>

#include "mstsim/partitions.hpp"

namespace mstsim {

namespace {

std::vector<Segment> build_schedule(std::uint64_t n, int ell) {
    std::vector<Segment> v;
    std::uint64_t t = 0;
    auto add = [&](Seg k, int j, std::uint64_t len) {
        v.push_back({k, j, t, len});
        t += len;
    };
    int L = big_l(n);
    add(Seg::Base, 0, 2 * n + 2);
    add(Seg::Ediam, 0, n + 1);
    for (int j = 0; j <= ell; ++j) {
        std::uint64_t F = (std::uint64_t{1} << (j + 1)) + 1;
        add(Seg::A1, j, F);
        add(Seg::B1, j, F);
        add(Seg::C1, j, F);
    }
    add(Seg::Height, 0, n + 1);
    add(Seg::Cluster, 0, n + 1);
    add(Seg::Roots, 0, n + 1);
    add(Seg::Dfs, 0, 2 * n + 2);
    std::uint64_t D = std::min<std::uint64_t>(n, 4 * static_cast<std::uint64_t>(L)) + 1;
    for (int j = 0; j <= ell; ++j) {
        std::uint64_t F = (std::uint64_t{1} << (j + 1)) + 1;
        add(Seg::A2, j, F);
        add(Seg::B2, j, F);
        add(Seg::TC, j, D);
        add(Seg::TB, j, D);
        if ((std::int64_t{1} << j) < L) {
            int cycles = (L - 1) >> j;
            for (int c = 0; c < cycles; ++c) {
                add(Seg::BC, j, static_cast<std::uint64_t>(L) + 1);
                add(Seg::BB, j, static_cast<std::uint64_t>(L) + 1);
            }
        }
    }
    add(Seg::Done, 0, 0);
    return v;
}

char at(const std::string& s, int j, char dflt = '*') { return j >= 0 && j < static_cast<int>(s.size()) ? s[j] : dflt; }

bool info_before(const Info& a, const Info& b) { return !b.present || (a.present && a.z < b.z); }

}  // namespace

const std::vector<Segment>& marker_schedule(std::uint64_t n, int ell) {
    static std::mutex mu;
    static std::map<std::pair<std::uint64_t, int>, std::vector<Segment>> cache;
    std::lock_guard<std::mutex> lk(mu);
    auto key = std::make_pair(n, ell);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, build_schedule(n, ell)).first;
    return it->second;
}

std::uint64_t marker_length(std::uint64_t n, int ell) { return marker_schedule(n, ell).back().start; }

void mark_visit(MarkState& s, RegVisitor& v, const std::string& p) {
    const auto& d = v.dims;
    visit_bundle(s.b, v, p);
    v.text(p + "topbits", s.topbits, kBitAlphabet, static_cast<unsigned>(d.maxlev + 1), 1);
    v.num(p + "md", s.md, d.cnt);
    v.num(p + "cnt", s.cnt, d.cnt);
    v.flag(p + "orb", s.orb);
    v.flag(p + "oh", s.oh);
    v.num(p + "ow", s.ow, d.w);
    v.flag(p + "bt", s.bt);
    v.flag(p + "bl", s.bl);
    v.info(p + "cur", s.cur);
    v.flag(p + "hv", s.hv);
    v.num(p + "dist", s.dist, d.cnt);
    v.num(p + "partid", s.partid, d.id);
    v.num(p + "h", s.h, d.lev);
    v.flag(p + "cut", s.cut);
    v.num(p + "ccnt", s.ccnt, d.cnt);
    v.num(p + "minhead", s.minhead, d.id);
    v.num(p + "absorb", s.absorb, d.id);
    for (int k = 0; k < 2; ++k) {
        std::string q = p + (k == 0 ? "dfsT." : "dfsB.");
        auto& x = s.dfs[k];
        v.u(q + "ds", x.ds, 2);
        v.u(q + "dport", x.dport, d.port);
        v.num(q + "did", x.did, d.id);
        v.num(q + "dcnt", x.dcnt, d.cnt);
        v.num(q + "idx", x.idx, d.cnt);
    }
    v.info(p + "conv", s.conv);
    v.info(p + "bc", s.bc);
    v.num(p + "bidx", s.bidx, d.cnt);
    v.num(p + "blast", s.blast, d.id);
    v.num(p + "tm", s.tm, d.cnt);
    v.num(p + "bm", s.bm, d.cnt);
}

void construct_visit(ConstructState& s, RegVisitor& v) {
    alg_visit(s.alg, v);
    if (s.alg.done) mark_visit(s.mk, v);
}

bool construct_finished(const ConstructState& s) {
    if (!s.alg.done) return false;
    return s.alg.round >= marker_origin(s.alg) + marker_length(s.alg.nt, s.alg.top);
}

void construct_step(const StepCtx& ctx, const ConstructState& s, const CNbrs& nb, ConstructState& o,
                    const MarkerOptions& opt) {
    alg_step(ctx, s.alg, [&](int p) -> const AlgState& { return nb[p].alg; }, o.alg);
    if (!s.alg.done || !o.alg.done) return;
    const std::uint64_t t0 = marker_origin(s.alg);
    const std::uint64_t r = o.alg.round;
    if (r < t0) return;
    const std::uint64_t n = s.alg.nt;
    const int ell = s.alg.top;
    const auto& sched = marker_schedule(n, ell);
    const std::uint64_t tau = r - t0;
    auto it = std::upper_bound(sched.begin(), sched.end(), tau, [](std::uint64_t x, const Segment& sg) { return x < sg.start; });
    const Segment& seg = *(it - 1);
    const std::uint64_t k = tau - seg.start;
    const bool last = seg.len > 0 && k + 1 == seg.len;
    const int j = seg.j;
    const int L = big_l(n);
    const std::uint64_t cap = opt.cap ? opt.cap : static_cast<std::uint64_t>(std::max(L, 1));

    const MarkState& m = s.mk;
    MarkState& w = o.mk;
    const NodeId me = ctx.id;
    const int pp = s.alg.parent;
    const int deg = ctx.degree();
    auto child = [&](int p) { return nb[p].alg.pid == me; };
    auto in_frag = [&](int p, int lev) { return child(p) && at(nb[p].mk.b.roots, lev) == '0'; };

    if (seg.kind == Seg::Base) {
        if (k == 0) {
            w = MarkState{};
            w.topbits.assign(ell + 1, '0');
        }
        auto& b = w.b;
        b.roots.assign(ell + 1, '*');
        b.endp.assign(ell + 1, '*');
        b.parents.assign(ell + 1, '0');
        b.agg.assign(ell + 1, '0');
        for (int q = 0; q <= ell; ++q) {
            bool in = (s.alg.amask >> q) & 1;
            if (pp && s.alg.ph == q && s.alg.cp) b.parents[q] = '1';
            if (!in) continue;
            b.roots[q] = (pp == 0 || s.alg.ph >= q) ? '1' : '0';
            char e = 'n';
            if (pp && s.alg.ph == q && s.alg.cc) {
                e = 'u';
            } else {
                for (int p = 1; p <= deg; ++p)
                    if (child(p) && nb[p].alg.ph == q && nb[p].alg.cp) e = 'd';
            }
            b.endp[q] = e;
        }
        b.pid = s.alg.pid;
        b.numk_n = n;
        if (pp == 0) {
            b.sp_rid = me;
            b.sp_d = 0;
        } else {
            b.sp_rid = nb[pp].mk.b.sp_rid;
            b.sp_d = nb[pp].mk.b.sp_d + 1;
        }
        b.numk_nv = 1;
        w.md = b.sp_d;
        std::vector<int> sum(ell + 1, 0);
        for (int q = 0; q <= ell; ++q) sum[q] = (b.endp[q] == 'u' || b.endp[q] == 'd') ? 1 : 0;
        for (int p = 1; p <= deg; ++p) {
            if (!child(p)) continue;
            const auto& u = nb[p].mk;
            b.numk_nv += u.b.numk_nv;
            w.md = std::max(w.md, u.md);
            for (int q = 0; q <= ell; ++q)
                if (at(u.b.roots, q) == '0') sum[q] += at(u.b.agg, q, '0') - '0';
        }
        for (int q = 0; q <= ell; ++q) b.agg[q] = static_cast<char>('0' + std::min(sum[q], 2));
        return;
    }
    if (seg.kind == Seg::Ediam) {
        w.b.ediam_x = pp == 0 ? m.md : nb[pp].mk.b.ediam_x;
        return;
    }

    const bool in = at(m.b.roots, j) != '*';
    if (seg.kind == Seg::A1 || seg.kind == Seg::A2) {
        if (seg.kind == Seg::A2 && k == 0) w.blast = 0;
        w.cnt = 0;
        w.orb = false;
        w.oh = false;
        w.ow = 0;
        if (!in) return;
        w.cnt = 1;
        for (int q = 0; q < j; ++q) w.orb = w.orb || at(m.topbits, q) == '1';
        char e = m.b.endp[j];
        if (e == 'u') {
            w.oh = true;
            w.ow = ctx.port(pp).w;
        }
        for (int p = 1; p <= deg; ++p) {
            if (e == 'd' && child(p) && at(nb[p].mk.b.parents, j, '0') == '1') {
                w.oh = true;
                w.ow = ctx.port(p).w;
            }
            if (!in_frag(p, j)) continue;
            const auto& u = nb[p].mk;
            w.cnt = std::min(cap, w.cnt + u.cnt);
            w.orb = w.orb || u.orb;
            if (u.oh && !w.oh) {
                w.oh = true;
                w.ow = u.ow;
            }
        }
        w.cnt = std::min(cap, w.cnt);
        return;
    }
    if (seg.kind == Seg::B1 || seg.kind == Seg::B2) {
        if (!in) {
            w.bt = w.bl = false;
            w.cur = Info{};
            return;
        }
        if (m.b.roots[j] == '1') {
            w.bt = m.cnt >= static_cast<std::uint64_t>(L);
            w.bl = w.bt && m.orb;
            w.cur = Info{true, me, static_cast<std::uint32_t>(j), m.oh ? m.ow : kInfWeight};
            if (seg.kind == Seg::B1 && k == 0 && ctx.trace.on())
                ctx.emit("classify", "F=" + std::to_string(me) + "," + std::to_string(j) + " class=" +
                                         (w.bt ? "top" : "bottom") + " color=" +
                                         (w.bt ? (w.bl ? "large" : "red") : "-") + " size=" + std::to_string(m.cnt));
        } else {
            const auto& P = nb[pp].mk;
            w.bt = P.bt;
            w.bl = P.bl;
            w.cur = P.cur;
        }
        if (seg.kind == Seg::B1 && last) {
            w.topbits[j] = w.bt ? '1' : '0';
            if (w.bt && !w.bl) {
                w.hv = true;
                w.dist = 0;
                w.partid = w.cur.z;
            }
        }
        return;
    }
    if (seg.kind == Seg::C1) {
        if (!in || !m.bl) return;
        int kb = -1;
        for (int q = j - 1; q >= 0; --q)
            if (at(m.b.roots, q) != '*') {
                kb = q;
                break;
            }
        if (kb < 0 || m.topbits[kb] != '0') return;
        auto better = [](std::uint64_t d1, NodeId p1, std::uint64_t d2, NodeId p2) {
            return d1 != d2 ? d1 < d2 : p1 < p2;
        };
        auto relax = [&](const MarkState& u, bool same) {
            if (!u.hv) return;
            std::uint64_t d = u.dist + (same ? 0 : 1);
            if (!w.hv || better(d, u.partid, w.dist, w.partid)) {
                w.hv = true;
                w.dist = d;
                w.partid = u.partid;
            }
        };
        if (m.b.roots[j] == '0') relax(nb[pp].mk, m.b.roots[kb] == '0');
        for (int p = 1; p <= deg; ++p)
            if (in_frag(p, j)) relax(nb[p].mk, at(nb[p].mk.b.roots, kb) == '0');
        return;
    }

    const bool pproot = pp == 0 || nb[pp].mk.partid != m.partid;
    auto same_pp = [&](int p) { return child(p) && nb[p].mk.partid == m.partid; };
    if (seg.kind == Seg::Height) {
        std::uint64_t h = 0;
        for (int p = 1; p <= deg; ++p)
            if (same_pp(p) && !nb[p].mk.cut) h = std::max(h, nb[p].mk.h + 1);
        w.h = h;
        w.cut = !pproot && static_cast<std::int64_t>(h) >= L - 1;
        return;
    }
    if (seg.kind == Seg::Cluster) {
        std::uint64_t c = 1;
        NodeId mh = 0;
        auto take = [&](NodeId x) {
            if (x && (!mh || x < mh)) mh = x;
        };
        for (int p = 1; p <= deg; ++p) {
            if (!same_pp(p)) continue;
            const auto& u = nb[p].mk;
            if (u.cut) {
                take(ctx.nbr_id(p));
            } else {
                c += u.ccnt;
                take(u.minhead);
            }
        }
        w.ccnt = std::min(cap, c);
        w.minhead = mh;
        return;
    }
    if (seg.kind == Seg::Roots) {
        if (pproot) {
            w.absorb = (m.ccnt < static_cast<std::uint64_t>(L) && m.minhead) ? m.minhead : 0;
            w.b.toproot = me;
        } else {
            const auto& P = nb[pp].mk;
            w.absorb = m.cut ? 0 : P.absorb;
            w.b.toproot = (m.cut && P.absorb != me) ? me : P.b.toproot;
        }
        int kb = -1;
        for (int q = 0; q <= ell; ++q)
            if (m.b.roots[q] != '*' && m.topbits[q] == '0') kb = q;
        w.b.botroot = (kb < 0 || m.b.roots[kb] == '1') ? me : nb[pp].mk.b.botroot;
        w.b.jdelim = ell;
        for (int q = ell; q >= 0; --q)
            if (m.b.roots[q] != '*' && m.topbits[q] == '1') w.b.jdelim = q;
        return;
    }
    auto part_root = [&](int side) { return (side == 0 ? m.b.toproot : m.b.botroot) == me; };
    auto same_part = [&](int p, int side) {
        return child(p) && (side == 0 ? nb[p].mk.b.toproot == m.b.toproot : nb[p].mk.b.botroot == m.b.botroot);
    };
    if (seg.kind == Seg::Dfs) {
        for (int side = 0; side < 2; ++side) {
            const auto& x = m.dfs[side];
            auto& y = w.dfs[side];
            auto next_child = [&](int from) {
                for (int p = from + 1; p <= deg; ++p)
                    if (same_part(p, side)) return p;
                return 0;
            };
            auto advance = [&](int from) {
                int p = next_child(from);
                y.dport = p;
                y.did = p ? ctx.nbr_id(p) : 0;
                if (!p) y.ds = 2;
            };
            if (k == 0) {
                y = MarkState::Dfs{};
                if (part_root(side)) {
                    y.ds = 1;
                    advance(0);
                }
                continue;
            }
            if (x.ds == 0) {
                if (!part_root(side) && pp) {
                    const auto& P = nb[pp].mk.dfs[side];
                    if (P.ds == 1 && P.did == me) {
                        y.ds = 1;
                        y.idx = P.dcnt + 1;
                        y.dcnt = y.idx;
                        advance(0);
                    }
                }
            } else if (x.ds == 1 && x.dport) {
                const auto& C = nb[x.dport].mk.dfs[side];
                if (C.ds == 2) {
                    y.dcnt = C.dcnt;
                    advance(x.dport);
                }
            }
        }
        return;
    }
    if (seg.kind == Seg::TC || seg.kind == Seg::BC) {
        int side = seg.kind == Seg::TC ? 0 : 1;
        Info c;
        bool mine = in && (side == 0 ? m.topbits[j] == '1' : (m.topbits[j] == '0' && m.cur.z > m.blast));
        if (mine) c = m.cur;
        for (int p = 1; p <= deg; ++p)
            if (same_part(p, side) && info_before(nb[p].mk.conv, c)) c = nb[p].mk.conv;
        w.conv = c;
        return;
    }
    if (seg.kind == Seg::TB || seg.kind == Seg::BB) {
        int side = seg.kind == Seg::TB ? 0 : 1;
        if (k == 0) {
            w.bc = Info{};
            if (part_root(side) && m.conv.present) {
                w.bc = m.conv;
                std::uint64_t& ctr = side == 0 ? w.tm : w.bm;
                w.bidx = ctr++;
            }
        } else if (!part_root(side)) {
            const auto& P = nb[pp].mk;
            w.bc = P.bc;
            w.bidx = P.bidx;
        }
        if (w.bc.present) {
            if (side == 1) w.blast = w.bc.z;
            if (m.dfs[side].idx == w.bidx / 2) {
                Info& slot = (side == 0 ? w.b.pt : w.b.pb)[w.bidx % 2];
                if (!(slot == w.bc) && ctx.trace.on())
                    ctx.emit("store", "node=" + std::to_string(me) + " piece=" + std::to_string(w.bidx) +
                                          " info=" + to_string(w.bc));
                slot = w.bc;
            }
        }
        return;
    }
}

MarkerResult run_marker(const WeightedGraph& g, TraceLevel lvl, const MarkerOptions& opt) {
    if (!weights_distinct(g)) throw Error("precondition-violation", "edge weights are not distinct");
    Simulator<ConstructProgram> sim(g, ConstructProgram{opt}, Scheduler{}, {}, lvl);
    HierarchyRecorder rec(g);
    std::vector<AlgState> algs(g.n());
    sim.on_unit = [&](Simulator<ConstructProgram>& s) {
        for (int v = 0; v < g.n(); ++v) algs[v] = s.states[v].alg;
        rec.observe(algs);
    };
    std::uint64_t horizon = 200ull * g.n() + 4096;
    sim.run(horizon, [](Simulator<ConstructProgram>& s) {
        for (auto& x : s.states)
            if (!construct_finished(x)) return false;
        return true;
    });
    MarkerResult res;
    res.tree.parent_port.resize(g.n());
    int top = 0;
    for (int v = 0; v < g.n(); ++v) {
        const auto& x = sim.states[v];
        res.tree.parent_port[v] = x.alg.parent;
        if (!construct_finished(x)) res.problems.push_back("node " + std::to_string(g.ids[v]) + " did not finish");
        res.alg_rounds = x.alg.tdone;
        top = x.alg.top;
        res.bundles.push_back(x.mk.b);
    }
    res.total_rounds = sim.time;
    res.hier = rec.finish(top);
    res.peak_bits = sim.peak_bits;
    res.problems.insert(res.problems.end(), rec.problems.begin(), rec.problems.end());
    if (lvl != TraceLevel::Off) {
        auto p = build_partitions(g, res.tree, res.hier);
        for (int side = 0; side < 2; ++side)
            for (auto& P : side == 0 ? p.top : p.bottom)
                sim.trace.add(sim.time, g.ids[P.root], "part",
                              std::string("kind=") + (side == 0 ? "Top" : "Bottom") + " root=" +
                                  std::to_string(g.ids[P.root]) + " size=" + std::to_string(P.members.size()) +
                                  " diam=" + std::to_string(part_diameter(g, res.tree, P)));
    }
    res.trace = std::move(sim.trace);
    return res;
}

}  // namespace mstsim
