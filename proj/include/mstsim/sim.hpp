#pragma once

#include <algorithm>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mstsim/graph.hpp"
#include "mstsim/registers.hpp"
#include "mstsim/trace.hpp"

namespace mstsim {

enum class SchedMode { Sync, Async };

struct Scheduler {
    SchedMode mode = SchedMode::Sync;
    std::uint64_t seed = 1;
    int fairness = 0;  // async window k; 0 means 2n
    int starve = -1;   // node index delayed to the end of every window (greedy-delay adversary)
};

enum class FaultKind { Randomize, Set, Flip };

struct FaultEvent {
    std::uint64_t time = 0;
    NodeId node = 0;
    FaultKind kind = FaultKind::Randomize;
    std::string reg;
    std::string value;
    int count = 1;
};

// Lines: "fault <time> <node> randomize" | "fault <time> <node> set <reg> <value>" | "fault <time> <node> flip <count>"
std::vector<FaultEvent> parse_faults(const std::string& text);
std::string serialize_faults(const std::vector<FaultEvent>& fs);

struct StepCtx {
    const WeightedGraph& g;
    int v;
    NodeId id;
    std::uint64_t t;
    const Dims& dims;
    Trace& trace;
    int degree() const { return g.degree(v); }
    const Port& port(int p) const { return g.port(v, p); }
    NodeId nbr_id(int p) const { return g.ids[g.port(v, p).nbr]; }
    void emit(std::string kind, std::string detail) const { trace.add(t, id, std::move(kind), std::move(detail)); }
};

template <class State>
class NbrView {
public:
    NbrView(const std::vector<State>& s, const WeightedGraph& g, int v) : s_(&s), g_(&g), v_(v) {}
    const State& operator[](int port) const { return (*s_)[g_->port(v_, port).nbr]; }
    int size() const { return g_->degree(v_); }

private:
    const std::vector<State>* s_;
    const WeightedGraph* g_;
    int v_;
};

// Type-erased neighbour accessor by port, for steps that read something other than the stored states.
template <class T>
struct NbrRef {
    const void* obj = nullptr;
    const T& (*get)(const void*, int) = nullptr;
    const T& operator[](int p) const { return get(obj, p); }
    template <class NB>
    static NbrRef of(const NB& nb) {
        return {&nb, [](const void* o, int p) -> const T& { return (*static_cast<const NB*>(o))(p); }};
    }
};

template <class P>
class Simulator {
public:
    using State = typename P::State;

    Simulator(const WeightedGraph& graph, P program, Scheduler s = {}, std::vector<FaultEvent> fs = {},
              TraceLevel lvl = TraceLevel::Milestones)
        : g(graph), prog(std::move(program)), dims(Dims::of(graph)), sched(s), faults(std::move(fs)), rng(s.seed) {
        trace.level = lvl;
        std::stable_sort(faults.begin(), faults.end(), [](auto& a, auto& b) { return a.time < b.time; });
        states.reserve(g.n());
        for (int v = 0; v < g.n(); ++v) {
            StepCtx ctx{g, v, g.ids[v], 0, dims, trace};
            states.push_back(prog.init(ctx));
        }
        node_peak.assign(g.n(), 0);
        activated.assign(g.n(), 0);
        for (int v = 0; v < g.n(); ++v) account(v);
        // Any k consecutive activations contain every node: blocks of (k+1)/2 >= n slots each hold every
        // node; below k = 2n-1 one seeded permutation is repeated instead.
        int k = sched.fairness > 0 ? sched.fairness : 2 * g.n();
        if (k < g.n()) throw Error("invalid-parameter", "fairness window smaller than n");
        fixed_perm = k < 2 * g.n() - 1;
        block_len = fixed_perm ? g.n() : (k + 1) / 2;
    }

    const WeightedGraph& g;
    P prog;
    Dims dims;
    Scheduler sched;
    std::vector<FaultEvent> faults;
    std::vector<State> states;
    Trace trace;
    std::uint64_t time = 0;   // completed ideal time units
    std::uint64_t steps = 0;  // node activations
    bool track_memory = true;
    std::uint64_t budget = 0;  // hard per-node budget in bits; 0 = none
    std::uint64_t peak_bits = 0;
    std::vector<std::uint64_t> node_peak;
    std::vector<int> activation_log;  // filled only when keep_log is set
    bool keep_log = false;
    std::function<void(Simulator&)> on_unit;

    // Runs whole time units until `horizon` units have elapsed or stop() holds after a unit.
    void run(std::uint64_t horizon, const std::function<bool(Simulator&)>& stop = {}) {
        while (time < horizon) {
            advance_unit();
            if (stop && stop(*this)) break;
        }
    }

    void advance_unit() {
        apply_due_faults();
        if (sched.mode == SchedMode::Sync) {
            std::vector<State> next = states;
            for (int v = 0; v < g.n(); ++v) {
                StepCtx ctx{g, v, g.ids[v], time + 1, dims, trace};
                prog.step(ctx, states[v], NbrView<State>(states, g, v), next[v]);
            }
            if (trace.full()) diff_all(next);
            states.swap(next);
            steps += g.n();
            if (track_memory)
                for (int v = 0; v < g.n(); ++v) account(v);
        } else {
            int remaining = g.n();
            std::fill(activated.begin(), activated.end(), 0);
            while (remaining > 0) {
                int v = next_node();
                if (!activated[v]) {
                    activated[v] = 1;
                    --remaining;
                }
                activate(v);
            }
        }
        ++time;
        if (on_unit) on_unit(*this);
    }

    void activate(int v) {
        StepCtx ctx{g, v, g.ids[v], time + 1, dims, trace};
        State out = states[v];
        prog.step(ctx, states[v], NbrView<State>(states, g, v), out);
        if (trace.full()) diff_one(v, states[v], out);
        states[v] = std::move(out);
        ++steps;
        if (keep_log) activation_log.push_back(v);
        if (track_memory) account(v);
    }

    void inject(const FaultEvent& f) {
        int v = g.index_of(f.node);
        if (v < 0) throw Error("invalid-fault", "unknown node " + std::to_string(f.node));
        std::string what;
        switch (f.kind) {
            case FaultKind::Randomize: {
                Randomizer r(dims, rng);
                prog.visit(states[v], r);
                what = "randomize";
                break;
            }
            case FaultKind::Set: {
                Setter s(dims, f.reg, f.value);
                prog.visit(states[v], s);
                if (!s.hit) throw Error("invalid-fault", "unknown register " + f.reg);
                what = "set " + f.reg + "=" + f.value;
                break;
            }
            case FaultKind::Flip: {
                BitCounter c(dims);
                prog.visit(states[v], c);
                std::vector<std::uint64_t> pos;
                for (int i = 0; i < f.count && c.bits > 0; ++i) pos.push_back(rng() % c.bits);
                std::sort(pos.begin(), pos.end());
                pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
                BitFlipper fl(dims, pos);
                prog.visit(states[v], fl);
                what = "flip " + std::to_string(f.count);
                break;
            }
        }
        trace.add(time, f.node, "fault", what);
        if (track_memory) account(v);
    }

    std::uint64_t bits_of(int v) const {
        BitCounter c(dims);
        prog.visit(const_cast<State&>(states[v]), c);
        return c.bits;
    }

private:
    std::mt19937_64 rng;
    std::vector<char> activated;
    std::vector<int> block;
    size_t block_pos = 0;
    int block_len = 0;
    bool fixed_perm = false;

    void apply_due_faults() {
        while (!faults.empty() && faults.front().time <= time) {
            inject(faults.front());
            faults.erase(faults.begin());
        }
    }

    // Blocks of block_len activations, each a seeded shuffle containing every node at least once.
    int next_node() {
        if (block_pos >= block.size() && fixed_perm && !block.empty()) block_pos = 0;
        if (block_pos >= block.size()) {
            block.clear();
            for (int v = 0; v < g.n(); ++v) block.push_back(v);
            while (static_cast<int>(block.size()) < block_len) block.push_back(static_cast<int>(rng() % g.n()));
            std::shuffle(block.begin(), block.end(), rng);
            if (sched.starve >= 0 && sched.starve < g.n()) {
                block.erase(std::remove(block.begin(), block.end(), sched.starve), block.end());
                while (static_cast<int>(block.size()) < block_len - 1) block.push_back((sched.starve + 1) % g.n());
                block.push_back(sched.starve);
            }
            block_pos = 0;
        }
        return block[block_pos++];
    }

    void account(int v) {
        auto b = bits_of(v);
        node_peak[v] = std::max(node_peak[v], b);
        peak_bits = std::max(peak_bits, b);
        if (budget && b > budget) trace.add(time, g.ids[v], "budget-violation", "bits=" + std::to_string(b));
    }

    void diff_one(int v, const State& a, const State& b) {
        Dumper da(dims), db(dims);
        prog.visit(const_cast<State&>(a), da);
        prog.visit(const_cast<State&>(b), db);
        for (size_t i = 0; i < db.out.size(); ++i)
            if (i >= da.out.size() || da.out[i] != db.out[i])
                trace.add(time + 1, g.ids[v], "write", db.out[i].first + "=" + db.out[i].second);
    }

    void diff_all(const std::vector<State>& next) {
        for (int v = 0; v < g.n(); ++v) diff_one(v, states[v], next[v]);
    }
};

}  // namespace mstsim
