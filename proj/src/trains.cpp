#include "mstsim/trains.hpp"

#include <algorithm>

namespace mstsim {

std::string to_string(Alarm a) {
    switch (a) {
        case Alarm::None: return "none";
        case Alarm::Sp: return "sp";
        case Alarm::Numk: return "numk";
        case Alarm::Ediam: return "ediam";
        case Alarm::Rs: return "roots";
        case Alarm::Eps: return "endp";
        case Alarm::Partition: return "partition";
        case Alarm::CycleSet: return "cycle-set";
        case Alarm::Timeout: return "timeout";
        case Alarm::ParentMismatch: return "parent-mismatch";
        case Alarm::RootId: return "root-id";
        case Alarm::C1: return "c1";
        case Alarm::C2: return "c2";
        case Alarm::Budget: return "budget";
    }
    return "?";
}

Alarm alarm_of_check(const std::string& c) {
    if (c.rfind("SP", 0) == 0) return Alarm::Sp;
    if (c.rfind("NUMK", 0) == 0 || c.rfind("NumK", 0) == 0) return Alarm::Numk;
    if (c.rfind("EDIAM", 0) == 0) return Alarm::Ediam;
    if (c.rfind("RS", 0) == 0) return Alarm::Rs;
    return Alarm::Eps;
}

namespace {

void visit_car(Car& c, RegVisitor& v, const std::string& p) {
    v.info(p + "x", c.x);
    v.flag(p + "b", c.b);
    v.flag(p + "fin", c.fin);
    v.u(p + "e", c.e, 2);
    v.flag(p + "flag", c.flag);
}

// Signed level stored with an offset of one so that -1 fits an unsigned register.
void visit_level(RegVisitor& v, const std::string& name, int& x) {
    std::uint64_t t = static_cast<std::uint64_t>(x + 1);
    v.num(name, t, v.dims.lev + 1);
    x = static_cast<int>(t) - 1;
}

}  // namespace

void verify_visit(VerifyState& s, RegVisitor& v, const std::string& p) {
    const auto& d = v.dims;
    v.flag(p + "ready", s.ready);
    v.u(p + "parent", s.parent, d.port);
    visit_bundle(s.b, v, p);
    for (int k = 0; k < 2; ++k) {
        std::string q = p + (k ? "bot." : "top.");
        auto& t = s.tr[k];
        v.u(q + "e", t.e, 2);
        v.u(q + "ph", t.ph, 3);
        v.u(q + "own", t.own, 2);
        v.u(q + "cp", t.cp, d.port);
        v.num(q + "cid", t.cid, d.id);
        v.flag(q + "pend", t.pend);
        v.flag(q + "got", t.got);
        visit_car(t.out, v, q + "out.");
        visit_car(t.in, v, q + "in.");
        visit_car(t.bx, v, q + "bx.");
        v.num(q + "tick", t.tick, d.time);
        auto& m = s.mon[k];
        v.flag(q + "mon.seen", m.seen);
        v.flag(q + "mon.armed", m.armed);
        v.u(q + "mon.e", m.e, 2);
        visit_level(v, q + "mon.lv", m.lv);
        v.num(q + "mon.idle", m.idle, d.time);
    }
    auto& c = s.cmp;
    v.info(p + "ask", c.ask);
    visit_level(v, p + "ask.j", c.aj);
    visit_level(v, p + "ask.last", c.last);
    v.num(p + "ask.timer", c.timer, d.time);
    v.u(p + "ask.cur", c.cur, d.port + 1);
    v.flag(p + "keep", c.keep);
    v.num(p + "keep.id", c.kid, d.id);
    v.u(p + "keep.lev", c.klev, d.lev);
    v.flag(p + "show.on", c.shown);
    v.info(p + "show", c.show);
    v.flag(p + "alarm", s.alarm);
    v.u(p + "alarm.code", s.code, 4);
}

void raise_alarm(const StepCtx& ctx, VerifyState& o, Alarm a, const std::string& detail) {
    if (o.alarm) return;
    o.alarm = true;
    o.code = a;
    ctx.emit("alarm", "check=" + to_string(a) + (detail.empty() ? "" : " " + detail));
}

VerifyState verify_init(int parent, const LabelBundle& b) {
    VerifyState s;
    s.parent = parent;
    s.b = b;
    return s;
}

TrainTiming train_timing(std::uint64_t n, bool async) {
    auto L = static_cast<std::uint64_t>(std::max(1, big_l(n)));
    auto ell = static_cast<std::uint64_t>(ell_from_n(n));
    std::uint64_t k = std::max(ell + 2, 2 * L + 1);  // pieces per cycle plus the header
    TrainTiming t;
    t.cycle = 2 * k + 2 * (4 * L) + 8;
    t.window = t.cycle + 2;
    std::uint64_t c = async ? 8 * t.cycle : t.cycle;
    t.restart = 3 * c;
    t.idle = 4 * c;
    return t;
}

char roots_at(const LabelBundle& b, int j) {
    if (j < 0 || j >= static_cast<int>(b.roots.size())) return '*';
    return b.roots[j];
}

NodeId part_root(const LabelBundle& b, int side) { return side ? b.botroot : b.toproot; }

bool relevant(const LabelBundle& u, int side, const Car& c) {
    if (!c.x.present) return false;
    int j = static_cast<int>(c.x.lev);
    if (roots_at(u, j) == '*') return false;
    return side == 0 ? j >= u.jdelim : (c.flag && j < u.jdelim);
}

std::vector<int> expected_levels(const LabelBundle& b, int side) {
    std::vector<int> out;
    for (int j = 0; j < static_cast<int>(b.roots.size()); ++j)
        if (b.roots[j] != '*' && (side == 0) == (j >= b.jdelim)) out.push_back(j);
    return out;
}

bool train_step(const StepCtx& ctx, int side, const VerifyState& s, const VNbrs& nb, VerifyState& o,
                const TrainTiming& tm, bool hold) {
    const TrainRegs& x = s.tr[side];
    TrainRegs& y = o.tr[side];
    const NodeId me = ctx.id;
    const NodeId pr = part_root(s.b, side);
    const bool root = pr == me;
    const int deg = ctx.degree();
    const Info* pcs = side ? s.b.pb : s.b.pt;

    auto is_kid = [&](int p) {
        if (p == s.parent) return false;
        const auto& u = nb[p];
        return u.ready && u.b.pid == me && part_root(u.b, side) == pr;
    };
    auto next_kid = [&](int after) {
        for (int p = after + 1; p <= deg; ++p)
            if (is_kid(p)) return p;
        return 0;
    };
    auto next_own = [&](int from) {
        for (int k = from; k < 2; ++k)
            if (pcs[k].present) return k;
        return -1;
    };
    auto flag_for = [&](const Info& z, bool pflag) {
        if (!z.present) return false;
        char r = roots_at(s.b, static_cast<int>(z.lev));
        return (r == '1' && z.z == me) || (r == '0' && pflag);
    };
    auto select = [&](int p) {
        y.got = false;
        y.pend = false;
        if (p) {
            y.cp = p;
            y.cid = ctx.nbr_id(p);
            y.in = Car{};
            y.in.b = nb[p].tr[side].out.b;
            y.ph = 2;
        } else {
            y.cp = 0;
            y.cid = 0;
            y.ph = 4;
        }
    };
    auto restart_local = [&](std::uint8_t e) {
        y.e = e;
        y.ph = 1;
        y.own = 0;
        y.cp = 0;
        y.cid = 0;
        y.pend = false;
        y.got = false;
    };
    // Pull the next item of the current child into `in`.
    auto take = [&]() {
        if (y.ph != 2 || y.pend) return;
        if (y.cp < 1 || y.cp > deg || !is_kid(y.cp)) {
            select(y.got && y.cp >= 0 ? next_kid(y.cp) : 0);
            return;
        }
        const Car& c = nb[y.cp].tr[side].out;
        if (c.b == y.in.b) return;
        if (c.fin) {
            // a child without pieces ends the prefix of the preorder that holds them
            select(y.got ? next_kid(y.cp) : 0);
        } else {
            y.in = c;
            y.pend = true;
            y.got = true;
        }
    };

    if (root) {
        y.tick = x.tick + 1;
        auto emit = [&](const Info& z) {
            y.bx = Car{z, !y.bx.b, false, y.e, flag_for(z, false)};
            y.tick = 0;
        };
        bool free = true;
        for (int p = 1; p <= deg && free; ++p)
            if (is_kid(p) && nb[p].tr[side].bx.b != y.bx.b) free = false;
        bool emitted = false;
        if (y.tick > tm.restart) {
            restart_local(static_cast<std::uint8_t>((y.e + 1) & 3));
            y.ph = 0;
            if (ctx.trace.on()) ctx.emit("epoch-flush", "node=" + std::to_string(me));
        }
        if (!hold && free) {
            switch (y.ph) {
                case 1: {
                    int k = next_own(y.own);
                    if (k >= 0) {
                        emit(pcs[k]);
                        y.own = static_cast<std::uint8_t>(k + 1);
                        emitted = true;
                    } else {
                        select(next_kid(0));
                    }
                    break;
                }
                case 2:
                    if (y.pend) {
                        emit(y.in.x);
                        y.pend = false;
                        emitted = true;
                    }
                    break;
                case 0:
                    if (ctx.trace.on()) ctx.emit("cycle-start", "part=" + std::to_string(me));
                    emit(Info{});
                    y.ph = 1;
                    emitted = true;
                    break;
                default:  // closing or idle: the next cycle starts with its header
                    restart_local(static_cast<std::uint8_t>((y.e + 1) & 3));
                    if (ctx.trace.on()) ctx.emit("cycle-start", "part=" + std::to_string(me));
                    emit(Info{});
                    emitted = true;
                    break;
            }
        }
        take();
        return emitted;
    }

    y.tick = 0;
    if (!s.parent) return false;
    const auto& P = nb[s.parent];
    if (!P.ready) return false;
    const TrainRegs& PT = P.tr[side];

    if (PT.ph == 2 && PT.cid == me && PT.e != y.e) {
        if (x.ph != 3 && ctx.trace.on()) ctx.emit("epoch-flush", "node=" + std::to_string(me));
        restart_local(PT.e);
    }
    bool free = PT.cid == me && PT.in.b == y.out.b;
    auto put = [&](Car c) {
        c.b = !y.out.b;
        y.out = c;
    };
    if (free) {
        switch (y.ph) {
            case 1: {
                int k = next_own(y.own);
                if (k >= 0) {
                    put(Car{pcs[k]});
                    y.own = static_cast<std::uint8_t>(k + 1);
                } else if (y.own == 0) {
                    Car f;
                    f.fin = true;
                    put(f);
                    y.ph = 3;
                } else {
                    select(next_kid(0));
                }
                break;
            }
            case 2:
                if (y.pend) {
                    put(Car{y.in.x});
                    y.pend = false;
                }
                break;
            case 4: {
                Car f;
                f.fin = true;
                put(f);
                y.ph = 3;
                break;
            }
            default:
                break;
        }
    }
    take();

    if (hold || PT.bx.b == y.bx.b) return false;
    for (int p = 1; p <= deg; ++p)
        if (is_kid(p) && nb[p].tr[side].bx.b != y.bx.b) return false;
    y.bx = PT.bx;
    y.bx.fin = false;
    y.bx.flag = flag_for(PT.bx.x, PT.bx.flag);
    if (ctx.trace.full() && y.bx.x.present)
        ctx.emit("piece-at", "node=" + std::to_string(me) + " part=" + std::to_string(pr) + " info=" + to_string(y.bx.x) +
                                 " flag=" + (y.bx.flag ? "on" : "off"));
    return true;
}

namespace {

int candidate_port(const StepCtx& ctx, const VerifyState& s, const VNbrs& nb, int j) {
    if (j < 0 || j >= static_cast<int>(s.b.endp.size())) return 0;
    char e = s.b.endp[j];
    if (e == 'u') return s.parent;
    if (e != 'd') return 0;
    for (int p = 1; p <= ctx.degree(); ++p) {
        if (p == s.parent) continue;
        const auto& u = nb[p];
        if (u.b.pid == ctx.id && j < static_cast<int>(u.b.parents.size()) && u.b.parents[j] == '1') return p;
    }
    return 0;
}

}  // namespace

Alarm edge_check(const StepCtx& ctx, int parent, char rj, int cand, const Info& ask, int p, const Info* su) {
    bool same = su && su->present && su->z == ask.z;
    Weight w = ctx.port(p).w;
    if (p == parent && rj == '0' && !(same && su->w == ask.w && su->lev == ask.lev)) return Alarm::ParentMismatch;
    if (p == cand) {
        if (same || ask.w != w) return Alarm::C1;
    } else if (!same && ask.w > w) {
        return Alarm::C2;
    }
    return Alarm::None;
}

void compare_step(const StepCtx& ctx, const VerifyState& s, const VNbrs& nb, VerifyState& o, const TrainTiming& tm,
                  const TrainParams& prm) {
    const auto& b = s.b;
    CompareRegs& c = o.cmp;
    const int deg = ctx.degree();
    const int ell = static_cast<int>(b.roots.size()) - 1;

    if (c.aj < 0) {
        std::vector<int> J = expected_levels(b, 0);
        auto Jb = expected_levels(b, 1);
        J.insert(J.end(), Jb.begin(), Jb.end());
        if (J.empty()) return;
        std::sort(J.begin(), J.end());
        auto it = std::upper_bound(J.begin(), J.end(), c.last);
        int target = it == J.end() ? J.front() : *it;
        for (int side = 0; side < 2 && c.aj < 0; ++side) {
            const Car& k = o.tr[side].bx;
            if (!relevant(b, side, k) || static_cast<int>(k.x.lev) != target) continue;
            c.ask = k.x;
            c.aj = target;
            c.timer = tm.window;
            c.cur = 1;
            c.keep = false;
            if (roots_at(b, target) == '1' && k.x.z != ctx.id)
                raise_alarm(ctx, o, Alarm::RootId, "level=" + std::to_string(target));
            if ((target == ell) != (k.x.w == kInfWeight))
                raise_alarm(ctx, o, Alarm::C1, "level=" + std::to_string(target) + " weight sentinel");
        }
        if (c.aj < 0) return;
    }

    const int j = c.aj;
    const int cand = candidate_port(ctx, s, nb, j);
    auto event = [&](int p, const Info* su) {
        if (prm.on_event && *prm.on_event) (*prm.on_event)(ctx.t, ctx.v, p, j);
        if (ctx.trace.full())
            ctx.emit("event", "E v=" + std::to_string(ctx.id) + " u=" + std::to_string(ctx.nbr_id(p)) +
                                  " j=" + std::to_string(j));
        Alarm a = edge_check(ctx, s.parent, roots_at(b, j), cand, c.ask, p, su);
        if (a != Alarm::None) raise_alarm(ctx, o, a, "level=" + std::to_string(j) + " port=" + std::to_string(p));
    };

    if (!prm.async) {
        for (int p = 1; p <= deg; ++p) {
            const auto& u = nb[p];
            if (!u.ready) continue;
            if (roots_at(u.b, j) == '*') {
                event(p, nullptr);
                continue;
            }
            for (int side = 0; side < 2; ++side) {
                const Car& k = u.tr[side].bx;
                if (relevant(u.b, side, k) && static_cast<int>(k.x.lev) == j) {
                    event(p, &k.x);
                    break;
                }
            }
        }
        if (c.timer > 0) --c.timer;
        if (c.timer == 0) {
            c.last = j;
            c.aj = -1;
        }
        return;
    }

    if (c.cur < 1) c.cur = 1;
    while (c.cur <= deg) {
        const auto& u = nb[c.cur];
        if (!u.ready) {
            c.keep = false;
            return;
        }
        if (roots_at(u.b, j) == '*') {
            event(c.cur, nullptr);
        } else if (u.cmp.shown && static_cast<int>(u.cmp.show.lev) == j) {
            event(c.cur, &u.cmp.show);
        } else {
            if (!(s.cmp.keep && s.cmp.kid == ctx.nbr_id(c.cur) && s.cmp.klev == j) && ctx.trace.on())
                ctx.emit("keep-filed", "v=" + std::to_string(ctx.id) + " server=" + std::to_string(ctx.nbr_id(c.cur)) +
                                           " j=" + std::to_string(j));
            c.keep = true;
            c.kid = ctx.nbr_id(c.cur);
            c.klev = j;
            return;
        }
        c.keep = false;
        ++c.cur;
    }
    c.keep = false;
    c.last = j;
    c.aj = -1;
}

}  // namespace mstsim
