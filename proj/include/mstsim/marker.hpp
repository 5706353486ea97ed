#pragma once

#include <string>
#include <vector>

#include "mstsim/alg.hpp"
#include "mstsim/labels.hpp"

namespace mstsim {

// Marker scratch plus the label bundle it fills. Runs after ALG terminates.
struct MarkState {
    LabelBundle b;
    std::string topbits;  // per level: the fragment is top (size >= L)
    std::uint64_t md = 0;  // max depth in subtree

    // per-level fragment waves
    std::uint64_t cnt = 0;
    bool orb = false;            // a top fragment lies strictly below in the subtree
    bool oh = false;             // candidate weight found in subtree
    Weight ow = 0;
    bool bt = false, bl = false;  // broadcast: fragment is top / large
    Info cur;                     // Info of the current-level fragment

    // merge
    bool hv = false;
    std::uint64_t dist = 0;
    NodeId partid = 0;

    // split
    std::uint64_t h = 0;
    bool cut = false;
    std::uint64_t ccnt = 0;
    NodeId minhead = 0, absorb = 0;

    // preorder tokens, one per partition
    struct Dfs {
        int ds = 0;  // 0 idle, 1 working, 2 finished
        int dport = 0;
        NodeId did = 0;
        std::uint64_t dcnt = 0, idx = 0;
    } dfs[2];

    // collection and placement
    Info conv, bc;
    std::uint64_t bidx = 0;
    NodeId blast = 0;
    std::uint64_t tm = 0, bm = 0;  // pieces placed so far (part roots)
};

struct ConstructState {
    AlgState alg;
    MarkState mk;
};

enum class Seg { Base, Ediam, A1, B1, C1, Height, Cluster, Roots, Dfs, A2, B2, TC, TB, BC, BB, Done };

struct Segment {
    Seg kind = Seg::Done;
    int j = 0;
    std::uint64_t start = 0, len = 0;
};

// Fixed slot layout of the marker, derived from n and the top level.
const std::vector<Segment>& marker_schedule(std::uint64_t n, int ell);
std::uint64_t marker_length(std::uint64_t n, int ell);

void mark_visit(MarkState& s, RegVisitor& v, const std::string& prefix = "");
void construct_visit(ConstructState& s, RegVisitor& v);

// Marker origin: every node has seen the done flood by then.
inline std::uint64_t marker_origin(const AlgState& a) { return a.tdone + a.nt; }
bool construct_finished(const ConstructState& s);

struct MarkerOptions {
    std::uint64_t cap = 0;  // count cap for the fragment waves; 0 = L
};

using CNbrs = NbrRef<ConstructState>;

// One synchronous step of ALG followed, once done, by the marker.
void construct_step(const StepCtx& ctx, const ConstructState& s, const CNbrs& nb, ConstructState& o,
                    const MarkerOptions& opt = {});

struct ConstructProgram {
    using State = ConstructState;
    MarkerOptions opt;
    State init(const StepCtx& c) const {
        State s;
        s.alg = alg_init(c.id);
        return s;
    }
    void step(const StepCtx& c, const State& s, const NbrView<State>& nb, State& o) const {
        auto get = [&](int p) -> const ConstructState& { return nb[p]; };
        construct_step(c, s, CNbrs::of(get), o, opt);
    }
    void visit(State& s, RegVisitor& v) const { construct_visit(s, v); }
};

struct MarkerResult {
    ComponentMap tree;
    Hierarchy hier;
    std::vector<LabelBundle> bundles;
    std::uint64_t alg_rounds = 0;    // termination round of ALG
    std::uint64_t total_rounds = 0;  // round at which every bundle is final
    std::uint64_t peak_bits = 0;
    Trace trace;
    std::vector<std::string> problems;
};

MarkerResult run_marker(const WeightedGraph& g, TraceLevel lvl = TraceLevel::Milestones, const MarkerOptions& opt = {});

}  // namespace mstsim
