#pragma once

#include <string>
#include <vector>

#include "mstsim/graph.hpp"

namespace mstsim {

struct Fragment {
    int level = 0;
    std::vector<int> members;  // sorted node indices
    int cand = -1;             // candidate edge index, -1 for T
    int parent = -1;           // enclosing fragment in the hierarchy tree
    std::vector<int> children;
    NodeId alg_root = 0;       // root id at the phase the fragment was active (ALG orientation)
};

// Laminar family of fragments with levels, plus the per-node level index.
struct Hierarchy {
    std::vector<Fragment> frags;
    int top = 0;                       // level of T
    std::vector<std::vector<int>> at;  // at[v][j]: fragment of v at level j, -1 if none

    int of(int v, int j) const { return at[v][j]; }
    int tree_fragment() const;  // index of T
    // Fills parent/children/at from members and levels.
    void link(int n);
};

// Root of each fragment with respect to the final tree orientation.
int fragment_root(const WeightedGraph& g, const ComponentMap& tree, const Fragment& f);

// Definition-level checks; empty on success.
std::vector<std::string> check_hierarchy(const WeightedGraph& g, const ComponentMap& tree, const Hierarchy& h);
// Candidate function property and minimality of every candidate.
std::vector<std::string> check_candidates(const WeightedGraph& g, const ComponentMap& tree, const Hierarchy& h,
                                          bool require_minimum);
// Minimum outgoing edge of a member set, -1 if none.
int min_outgoing_edge(const WeightedGraph& g, const std::vector<int>& members);

}  // namespace mstsim
