#pragma once

#include <string>

#include "mstsim/hierarchy.hpp"
#include "mstsim/sim.hpp"

namespace mstsim {

// Per-node registers of ALG. Stage scratch is a union keyed on the round: the counting
// fields live in [11B, 15B), the search/reorientation fields in [15B, 22B).
struct AlgState {
    int parent = 0;  // port, 0 = root
    NodeId pid = 0;  // id of the parent, 0 at a root
    int level = 0;
    NodeId est = 0;  // root id estimate
    std::uint64_t round = 0;

    // COUNTSIZE
    bool cw = false, ce = false, trunc = false;
    std::uint64_t ttl = 0, cnt = 0;

    // FINDOUT, reorientation, handshake
    bool active = false;
    bool fw = false, fe = false, fhas = false, fown = false;
    Weight fwt = 0;
    int fport = 0;
    bool pass = false;   // root token handed to the child on the candidate route
    bool pivot = false;  // this node is w and will hook over fport

    bool done = false;
    std::uint64_t nt = 0;     // size count kept by an active root; n once done
    std::uint64_t tdone = 0;  // termination round
    int top = 0;              // level of T once done

    // marker bookkeeping
    std::uint64_t amask = 0;  // bit i: member of an active level-i fragment
    int ph = 0;               // phase in which the parent edge was created
    bool cc = false, cp = false;  // child side / parent side fragment chose the parent edge
};

struct PhaseInfo {
    int i = -1;
    std::uint64_t B = 0, off = 0;
};
PhaseInfo phase_of(std::uint64_t round);

AlgState alg_init(NodeId id);
void alg_visit(AlgState& s, RegVisitor& v, const std::string& prefix = "");

// One synchronous ALG step. `nb(p)` returns the neighbour's AlgState at port p.
template <class NB>
void alg_step(const StepCtx& ctx, const AlgState& s, NB&& nb, AlgState& o);

struct AlgProgram {
    using State = AlgState;
    State init(const StepCtx& c) const { return alg_init(c.id); }
    void step(const StepCtx& c, const State& s, const NbrView<State>& nb, State& o) const {
        alg_step(c, s, [&](int p) -> const AlgState& { return nb[p]; }, o);
    }
    void visit(State& s, RegVisitor& v) const { alg_visit(s, v); }
};

// Harness-side recorder: snapshots the active fragments of each phase.
class HierarchyRecorder {
public:
    explicit HierarchyRecorder(const WeightedGraph& g) : g_(g) {}
    // Call with the states at the end of every round.
    void observe(const std::vector<AlgState>& st);
    Hierarchy finish(int top) const;
    std::vector<std::string> problems;  // phase-isolation or forest violations seen while observing

private:
    const WeightedGraph& g_;
    std::vector<Fragment> frags_;
    std::vector<AlgState> prev_;
};

struct AlgResult {
    ComponentMap tree;
    Hierarchy hier;
    std::uint64_t rounds = 0;  // termination round at the root of T
    std::uint64_t all_done = 0;
    std::uint64_t peak_bits = 0;
    unsigned id_bits = 0;
    Trace trace;
    std::vector<std::string> problems;
};

AlgResult run_alg(const WeightedGraph& g, TraceLevel lvl = TraceLevel::Milestones);

// ---------------------------------------------------------------------------

template <class NB>
void alg_step(const StepCtx& ctx, const AlgState& s, NB&& nb, AlgState& o) {
    o.round = s.round + 1;
    if (s.done) return;
    if (s.parent) {
        const AlgState& P = nb(s.parent);
        if (P.done) {
            o.done = true;
            o.nt = P.nt;
            o.tdone = P.tdone;
            o.top = P.top;
            return;
        }
    }
    auto r = o.round;
    auto ph = phase_of(r);
    if (ph.i < 0) return;
    const auto B = ph.B, off = ph.off;
    const int i = ph.i;
    const NodeId me = ctx.id;

    if (off == 0) {
        o.cw = o.ce = o.trunc = false;
        o.ttl = o.cnt = 0;
        o.active = o.fw = o.fe = o.fhas = o.fown = o.pass = o.pivot = false;
        o.fwt = 0;
        o.fport = 0;
        if (s.parent == 0) {
            o.level = i;
            o.cw = true;
            o.ttl = 2 * B - 1;
            o.est = me;
            ctx.emit("phase-start", std::to_string(i));
        }
        return;
    }
    if (off < 4 * B) {
        if (!s.cw && s.parent) {
            const AlgState& P = nb(s.parent);
            if (P.cw && P.ttl > 0) {
                o.cw = true;
                o.ttl = P.ttl - 1;
                o.est = P.est;
            }
        }
        if (s.cw && !s.ce) {
            bool ready = true, kids = false, tr = false;
            std::uint64_t c = 1;
            for (int p = 1; p <= ctx.degree(); ++p) {
                const AlgState& U = nb(p);
                if (U.pid != me || U.parent == 0) continue;
                kids = true;
                if (s.ttl == 0) continue;
                if (!U.cw || !U.ce) {
                    ready = false;
                    break;
                }
                c += U.cnt;
                tr = tr || U.trunc;
            }
            if (s.ttl == 0) {
                o.ce = true;
                o.cnt = 1;
                o.trunc = kids;
            } else if (ready) {
                o.ce = true;
                o.cnt = std::min<std::uint64_t>(c, 2 * B);
                o.trunc = tr;
            }
        }
        return;
    }
    if (off == 4 * B) {
        // COUNTSIZE ends; scratch switches to the search variant
        bool root = s.parent == 0;
        o.cw = o.ce = o.trunc = false;
        o.ttl = o.cnt = 0;
        if (root) {
            if (s.ce && !s.trunc && s.cnt <= 2 * B - 1) {
                o.active = true;
                o.nt = s.cnt;
                o.fw = true;
                o.amask |= std::uint64_t{1} << i;
                ctx.emit("active", "root=" + std::to_string(me) + " level=" + std::to_string(i) + " size=" + std::to_string(s.cnt));
            } else {
                o.level = i + 1;
            }
        }
        return;
    }
    if (off < 8 * B) {
        if (!s.fw && s.parent && nb(s.parent).fw) {
            o.fw = true;
            o.amask |= std::uint64_t{1} << i;
        }
        if (s.fw && !s.fe && r >= 17 * B) {
            bool ready = true;
            bool has = false, own = false;
            Weight best = 0;
            int port = 0;
            for (int p = 1; p <= ctx.degree(); ++p) {
                const AlgState& U = nb(p);
                Weight w = ctx.port(p).w;
                if (U.est != s.est && (!has || w < best)) {
                    has = true, own = true, best = w, port = p;
                }
            }
            for (int p = 1; p <= ctx.degree(); ++p) {
                const AlgState& U = nb(p);
                if (U.pid != me || U.parent == 0) continue;
                if (!U.fe) {
                    ready = false;
                    break;
                }
                if (U.fhas && (!has || U.fwt < best)) {
                    has = true, own = false, best = U.fwt, port = p;
                }
            }
            if (ready) {
                o.fe = true;
                o.fhas = has;
                o.fown = own;
                o.fwt = best;
                o.fport = port;
            }
        }
        return;
    }
    if (off == 8 * B) {
        if (s.parent == 0 && s.active) {
            if (!s.fhas) {
                o.done = true;
                o.tdone = r;
                o.top = i;
                ctx.emit("terminate", "round=" + std::to_string(r));
            } else {
                ctx.emit("candidate", "F=" + std::to_string(me) + "," + std::to_string(i) + " edge=?,?," + std::to_string(s.fwt));
                if (s.fown) o.pivot = true;
                else o.pass = true;
            }
        }
        return;
    }
    if (off < 11 * B - 1) {
        if (s.pass) {
            const AlgState& X = nb(s.fport);
            o.pass = false;
            o.fhas = false;  // the route continues below; never take the token back
            o.parent = s.fport;
            o.pid = ctx.nbr_id(s.fport);
            o.ph = X.ph;
            o.cc = X.cp;
            o.cp = X.cc;
        } else if (s.parent && s.fhas && nb(s.parent).pass && nb(s.parent).fwt == s.fwt) {
            o.parent = 0;
            o.pid = 0;
            o.ph = 0;
            o.cc = o.cp = false;
            if (s.fown) o.pivot = true;
            else o.pass = true;
        }
        return;
    }
    if (off == 11 * B - 1 && s.pivot) {
        const AlgState& X = nb(s.fport);
        NodeId xid = ctx.nbr_id(s.fport);
        bool mutual = X.pivot && X.fwt == ctx.port(s.fport).w;
        if (!(mutual && xid < me)) {
            o.parent = s.fport;
            o.pid = xid;
            o.ph = i;
            o.cc = true;
            o.cp = mutual;
            ctx.emit("hook", std::to_string(me) + "\u2192" + std::to_string(xid));
        }
        o.pivot = false;
    }
}

}  // namespace mstsim
