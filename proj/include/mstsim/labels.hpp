#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mstsim/hierarchy.hpp"
#include "mstsim/registers.hpp"

namespace mstsim {

// EndP symbols: 'u' up, 'd' down, 'n' none, '*' no fragment at that level.
inline constexpr const char* kRootsAlphabet = "01*";
inline constexpr const char* kEndpAlphabet = "udn*";
inline constexpr const char* kBitAlphabet = "01";
inline constexpr const char* kAggAlphabet = "012";

struct LabelBundle {
    std::string roots, endp, parents, agg;
    NodeId pid = 0;              // id of the parent, 0 at the root
    NodeId sp_rid = 0;           // claimed root id
    std::uint64_t sp_d = 0;      // claimed depth
    std::uint64_t numk_n = 0;    // claimed n (L')
    std::uint64_t numk_nv = 0;   // subtree size
    std::uint64_t ediam_x = 0;   // claimed depth bound
    NodeId toproot = 0, botroot = 0;
    int jdelim = 0;              // first level whose fragment is top; levels below are bottom
    Info pt[2], pb[2];           // permanent pieces in the Top and Bottom part
    bool operator==(const LabelBundle&) const = default;
};

// Registers of a bundle, strings sized from the instance.
void visit_bundle(LabelBundle& b, RegVisitor& v, const std::string& prefix = "");

int ell_from_n(std::uint64_t n);  // floor(log2 n), 0 for n <= 1
int big_l(std::uint64_t n);       // ceil(log2 n)

struct Violation {
    NodeId node = 0;
    std::string check;
    std::string detail;
};

// What a node sees in one time unit: its own registers and those of its neighbours.
struct LocalView {
    const WeightedGraph& g;
    int v;
    int parent;  // own parent port, 0 at the root
    const LabelBundle& me;
    std::function<const LabelBundle&(int port)> nb;
};

// Each returns the violated clauses at the viewing node (empty = ok).
std::vector<Violation> verify_sp(const LocalView& x);
std::vector<Violation> verify_numk(const LocalView& x);
std::vector<Violation> verify_ediam(const LocalView& x);
std::vector<Violation> verify_rs(const LocalView& x);
std::vector<Violation> verify_eps(const LocalView& x);
// All five structural label schemes.
std::vector<Violation> verify_structure(const LocalView& x);

// Runs the structural checks at every node (no simulation).
std::vector<Violation> check_labels(const WeightedGraph& g, const ComponentMap& tree, const std::vector<LabelBundle>& b);

// Port of the level-j candidate at v, 0 if v is not its endpoint. Throws Error("eps2-violation")
// if several children are marked.
int induced_candidate(const LocalView& x, int j);

// Centralized marker for the structural part of the bundle.
std::vector<LabelBundle> mark_labels(const WeightedGraph& g, const ComponentMap& tree, const Hierarchy& h);

// Rebuilds the hierarchy and candidates encoded by ROOTS/EndP/PARENTS. Fragments without a
// unique endpoint get cand = -1.
Hierarchy decode_labels(const WeightedGraph& g, const ComponentMap& tree, const std::vector<LabelBundle>& b, int ell);

// Exhaustive soundness check over all string assignments on rooted trees up to max_n nodes,
// string length ell+1 for every ell <= max_ell.
struct SoundnessReport {
    std::uint64_t trees = 0;
    std::uint64_t roots_legal = 0;     // RS-legal ROOTS assignments
    std::uint64_t rs_base_only = 0;   // pass RS0-RS5 but not the nesting clause
    std::uint64_t rs_base_only_nonlaminar = 0;  // ... and decode to a non-laminar family
    std::uint64_t full_legal = 0;      // RS+EPS-legal full assignments
    std::uint64_t hierarchy_failures = 0;
    std::uint64_t candidate_failures = 0;
    std::vector<std::string> examples;  // first few failures
};
SoundnessReport exhaustive_label_soundness(int max_n, int max_ell);

// Label file: one "label <id> KEY=value ..." line per node.
std::string serialize_labels(const WeightedGraph& g, const std::vector<LabelBundle>& b);
std::vector<LabelBundle> parse_labels(const WeightedGraph& g, const std::string& text);

}  // namespace mstsim
