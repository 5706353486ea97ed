#pragma once

#include <cstdint>
#include <functional>

#include "mstsim/labels.hpp"
#include "mstsim/sim.hpp"

namespace mstsim {

// A train car: one piece (absent in the cycle header) with an alternating bit.
struct Car {
    Info x;
    bool b = false;
    bool fin = false;   // convergecast: end of this node's stream
    std::uint8_t e = 0;  // broadcast: cycle epoch (mod 4)
    bool flag = false;  // broadcast: the receiver belongs to the piece's fragment
};

// Registers of one train (side 0 = Top part, side 1 = Bottom part).
struct TrainRegs {
    std::uint8_t e = 0;  // epoch of the cycle this node last joined
    std::uint8_t ph = 3;  // 1 own pieces, 2 relaying children, 3 finished, 4 closing
    std::uint8_t own = 0;
    int cp = 0;           // port of the child being relayed
    NodeId cid = 0;       // its id, read by the child
    bool pend = false;    // `in` holds an item not yet forwarded
    bool got = false;     // the current child sent at least one item
    Car out, in, bx;
    std::uint64_t tick = 0;  // part root: own steps since the last emission
};

struct Monitor {
    bool seen = false, armed = false;
    std::uint8_t e = 0;
    int lv = -1;  // last relevant level in the current cycle
    std::uint64_t idle = 0;
};

struct CompareRegs {
    Info ask;
    int aj = -1;              // level under comparison, -1 while waiting for the next piece
    int last = -1;            // level compared most recently
    std::uint64_t timer = 0;  // sync window left
    int cur = 0;              // async port cursor
    bool keep = false;        // Keep request (kid, klev)
    NodeId kid = 0;
    int klev = 0;
    bool shown = false;       // async Show register
    Info show;
};

enum class Alarm : std::uint8_t {
    None, Sp, Numk, Ediam, Rs, Eps, Partition, CycleSet, Timeout, ParentMismatch, RootId, C1, C2, Budget
};
std::string to_string(Alarm a);
Alarm alarm_of_check(const std::string& check);

// All verifier registers of a node.
struct VerifyState {
    bool ready = true;  // false while the node still constructs (harness)
    int parent = 0;
    LabelBundle b;
    TrainRegs tr[2];
    Monitor mon[2];
    CompareRegs cmp;
    bool alarm = false;
    Alarm code = Alarm::None;
};

void verify_visit(VerifyState& s, RegVisitor& v, const std::string& prefix = "");

// Sticky: only the first alarm is recorded and traced.
void raise_alarm(const StepCtx& ctx, VerifyState& o, Alarm a, const std::string& detail = "");

// Fresh verifier registers over given labels.
VerifyState verify_init(int parent, const LabelBundle& b);

using VNbrs = NbrRef<VerifyState>;

// Timing bounds derived from a node's own n claim.
struct TrainTiming {
    std::uint64_t cycle = 0;    // sync bound on one train cycle
    std::uint64_t window = 0;   // sync Ask window per level
    std::uint64_t restart = 0;  // part root restarts a stalled cycle
    std::uint64_t idle = 0;     // monitor timeout
};
TrainTiming train_timing(std::uint64_t n, bool async);

using EventFn = std::function<void(std::uint64_t t, int v, int port, int j)>;

struct TrainParams {
    bool async = false;
    const EventFn* on_event = nullptr;
};

// Level j of b: '*' beyond the string.
char roots_at(const LabelBundle& b, int j);
NodeId part_root(const LabelBundle& b, int side);
// The piece in u's broadcast buffer on `side` is u's own level-lev fragment.
bool relevant(const LabelBundle& u, int side, const Car& c);
// Levels whose Info the node expects on `side`.
std::vector<int> expected_levels(const LabelBundle& b, int side);

// One step of one train. Returns true if a new car reached the broadcast buffer.
bool train_step(const StepCtx& ctx, int side, const VerifyState& s, const VNbrs& nb, VerifyState& o,
                const TrainTiming& tm, bool hold);

// Checks of one comparison event at v for level j against neighbour port p showing `su`
// (null: the neighbour has no level-j fragment). `cand` is v's level-j candidate port.
Alarm edge_check(const StepCtx& ctx, int parent, char rj, int cand, const Info& ask, int p, const Info* su);

// Ask/Show/Keep comparison with the checks run at every event. Raises alarms in o.
void compare_step(const StepCtx& ctx, const VerifyState& s, const VNbrs& nb, VerifyState& o, const TrainTiming& tm,
                  const TrainParams& prm);

}  // namespace mstsim
