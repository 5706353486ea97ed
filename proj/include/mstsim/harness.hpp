#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mstsim/marker.hpp"
#include "mstsim/verifier.hpp"

namespace mstsim {

// Per-node registers of the self-stabilizing composition. In construct mode the node runs
// ALG + marker under a pulse synchronizer (cur = state after `pulse` steps, prev = one step
// earlier); in verify mode it runs the verifier on the labels it produced.
struct HarnessState {
    std::uint64_t epoch = 0;
    bool verify = false;
    std::uint64_t pulse = 0;
    ConstructState cur, prev;
    VerifyState vs;
};

void harness_visit(HarnessState& s, RegVisitor& v);
HarnessState harness_fresh(NodeId id, std::uint64_t epoch);

struct HarnessLog {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> raises;  // (time, new epoch)
    std::vector<std::pair<std::uint64_t, int>> resets;            // (time, node) for every reset
};

struct HarnessProgram {
    using State = HarnessState;
    bool async = false;
    HarnessLog* log = nullptr;
    State init(const StepCtx& c) const { return harness_fresh(c.id, 0); }
    void step(const StepCtx& c, const State& s, const NbrView<State>& nb, State& o) const;
    void visit(State& s, RegVisitor& v) const { harness_visit(s, v); }
};

struct SelfstabConfig {
    bool async = false;
    std::uint64_t seed = 1;
    int fairness = 0;
    bool randomize_init = false;
    std::vector<FaultEvent> faults;  // scheduled faults (absolute times)
    int post_faults = 0;             // randomize one node once converged, this many times
    std::uint64_t horizon = 0;       // 0: derived from n
    std::uint64_t settle = 0;        // legal units required before a post fault and at the end; 0: derived
    std::uint64_t budget_bits = 0;
};

struct Verdict {
    bool converged = false;
    std::uint64_t convergence_time = 0;  // from the last fault (or 0) to the start of the final legal stretch
    std::uint64_t initial_convergence = 0;  // first time the system was legal
    std::uint64_t resets = 0;            // distinct reset waves started
    std::vector<std::uint64_t> detection_times;
    std::vector<std::uint64_t> detection_distances;
    std::vector<std::uint64_t> reconvergence_times;  // per post fault: fault to legal again
    std::uint64_t closure_breaks = 0;  // legal to illegal without a fault
    std::uint64_t peak_bits = 0;
    std::uint64_t end_time = 0;
    bool tree_ok = false;  // final tree equals the oracle MST
    std::string to_json() const;
};

// Every node verifies in one epoch, no alarm, and the parent pointers form the oracle MST.
bool legal(const WeightedGraph& g, const std::vector<HarnessState>& st, const std::vector<int>& mst);

Verdict run_selfstab(const WeightedGraph& g, const SelfstabConfig& cfg, Trace* trace_out = nullptr,
                     TraceLevel lvl = TraceLevel::Off);

}  // namespace mstsim
