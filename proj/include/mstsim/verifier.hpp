#pragma once

#include <optional>
#include <random>
#include <vector>

#include "mstsim/partitions.hpp"
#include "mstsim/trains.hpp"

namespace mstsim {

struct VerifierOptions {
    bool async = false;
    bool structural = true;             // one-round label checks
    const EventFn* on_event = nullptr;  // E(v,u,j) observer (harness side)
};

// One activation of the verifier at a node: one-round checks, both trains, the cycle-set
// monitor, the Show server and the Ask client.
void verify_step(const StepCtx& ctx, const VerifyState& s, const VNbrs& nb, VerifyState& o,
                 const VerifierOptions& opt);

// Cycle-set monitor of one side, fed after train_step; o.tr[side].bx holds the car that arrived.
void monitor_step(const StepCtx& ctx, int side, const VerifyState& s, VerifyState& o, bool arrived,
                  const TrainTiming& tm);

struct VerifierProgram {
    using State = VerifyState;
    std::vector<VerifyState> start;
    VerifierOptions opt;
    State init(const StepCtx& c) const { return start[c.v]; }
    void step(const StepCtx& c, const State& s, const NbrView<State>& nb, State& o) const {
        auto get = [&](int p) -> const VerifyState& { return nb[p]; };
        verify_step(c, s, VNbrs::of(get), o, opt);
    }
    void visit(State& s, RegVisitor& v) const { verify_visit(s, v); }
};

std::vector<VerifyState> verifier_start(const WeightedGraph& g, const ComponentMap& tree,
                                        const std::vector<LabelBundle>& b);

// Labels for the MST: ALG hierarchy plus the centralized marker.
struct Certified {
    ComponentMap tree;
    Hierarchy hier;
    std::vector<LabelBundle> bundles;
};
Certified certify(const WeightedGraph& g);

struct Detection {
    bool detected = false;
    std::uint64_t time = 0;      // first alarm minus fault time
    std::uint64_t distance = 0;  // hops from the fault set to the farthest early alarm
    std::vector<NodeId> alarmed;
};
// First alarm after `fault_time`; distance is taken over alarms raised at that first time.
Detection measure_detection(const WeightedGraph& g, const Trace& t, std::uint64_t fault_time,
                            const std::vector<int>& fault_nodes);

// Nodes allowed to alarm for a fault set: closed neighbourhood of every Top or Bottom part that
// contains a node of N[x] for a faulty x.
std::vector<char> fault_region(const WeightedGraph& g, const std::vector<LabelBundle>& b,
                               const std::vector<int>& fault_nodes);

// Corruption corpus. NonMinimal is a whole certificate (labels of a spanning tree that is not
// minimal, consistent otherwise); the others modify running states in place.
enum class Corruption { NonMinimal, NonTree, Strings, Pieces, Erased, PartRoot, Trains };
const std::vector<Corruption>& all_corruptions();
std::string to_string(Corruption k);
Corruption parse_corruption(const std::string& s);

// Throws Error("invalid-parameter") if g has no non-tree edge.
Certified nonminimal_certificate(const WeightedGraph& g);
// Applies `count` corruptions of kind k at distinct random nodes; returns their indices.
std::vector<int> corrupt(Corruption k, const WeightedGraph& g, std::vector<VerifyState>& st, std::mt19937_64& rng,
                         int count = 1);

struct DetectRun {
    Detection d;
    std::uint64_t fault_time = 0;
    std::vector<int> nodes;
    bool local = true;  // every alarm inside fault_region
    bool clean_before = true;  // no alarm during the warm-up
};
// Clean verifier run, corruption after a warm-up of two train cycles (at time 0 for NonMinimal),
// then until the first alarm or the horizon.
DetectRun detect_run(const WeightedGraph& g, const Certified& c, Corruption k, bool async, std::uint64_t seed,
                     int count, std::uint64_t horizon);

// Time until every (v, port, j) with j in J(v) saw an event; 0 if not within the horizon.
std::uint64_t compare_completion(const WeightedGraph& g, const Certified& c, bool async, std::uint64_t seed,
                                 std::uint64_t horizon);

// Longest time from a cycle header leaving a part root until every node of the part holds all of
// the cycle's pieces, over the cycles started in [skip, horizon). 0 if some node never completed
// such a cycle on some side.
std::uint64_t train_delivery(const WeightedGraph& g, const Certified& c, bool async, std::uint64_t seed,
                             std::uint64_t skip, std::uint64_t horizon);

// Baseline that stores the Info of every level at every node and checks in one round.
struct FullState {
    bool ready = true;
    int parent = 0;
    LabelBundle b;
    std::vector<Info> all;  // index j: Info(F_j(v)) or absent
    bool alarm = false;
    Alarm code = Alarm::None;
};

void full_visit(FullState& s, RegVisitor& v);

struct FullProgram {
    using State = FullState;
    std::vector<FullState> start;
    State init(const StepCtx& c) const { return start[c.v]; }
    void step(const StepCtx& c, const State& s, const NbrView<State>& nb, State& o) const;
    void visit(State& s, RegVisitor& v) const { full_visit(s, v); }
};

std::vector<FullState> full_start(const WeightedGraph& g, const ComponentMap& tree, const Hierarchy& h,
                                  const std::vector<LabelBundle>& b);

}  // namespace mstsim
