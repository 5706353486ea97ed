#pragma once

#include <string>
#include <vector>

#include "mstsim/labels.hpp"

namespace mstsim {

enum class Color { None, Red, Blue, Large, Green };
std::string to_string(Color c);

struct FragClass {
    bool top = false;
    Color color = Color::None;
};

struct Part {
    bool top = false;
    int root = -1;             // node index of the part root
    std::vector<int> members;  // sorted
    std::vector<Info> pieces;  // ordered by (level, root id)
};

struct Partitions {
    int L = 0;                  // ceil(log2 n)
    std::vector<FragClass> cls;  // per fragment of the hierarchy
    std::vector<Part> pp;        // red fragments with their merged blue fragments
    std::vector<Part> top, bottom;
    std::vector<int> pp_of, top_of, bottom_of;  // node -> part index
    std::vector<int> jdelim;                    // node -> first level with a top fragment
};

// Info of a hierarchy fragment: root id in the final orientation, level, candidate weight
// (infinite for T).
Info fragment_info(const WeightedGraph& g, const ComponentMap& tree, const Hierarchy& h, int f);

std::vector<FragClass> classify_fragments(const Hierarchy& h, int n);
std::vector<Part> build_pp(const WeightedGraph& g, const ComponentMap& tree, const Hierarchy& h,
                           const std::vector<FragClass>& cls);
std::vector<Part> split_top(const WeightedGraph& g, const ComponentMap& tree, const std::vector<Part>& pp, int L);
std::vector<Part> build_bottom(const WeightedGraph& g, const ComponentMap& tree, const Hierarchy& h,
                               const std::vector<FragClass>& cls);

// Full centralized construction: classes, parts, and ordered pieces per part.
Partitions build_partitions(const WeightedGraph& g, const ComponentMap& tree, const Hierarchy& h);

// Writes TOPROOT/BOTROOT/JDELIM and the permanent pieces (DFS placement) into the bundles.
// Throws Error("capacity-violation") if a part has more pieces than twice its size.
void distribute_info(const WeightedGraph& g, const ComponentMap& tree, const Partitions& p,
                     std::vector<LabelBundle>& b);

// Preorder of a part (children in ascending port order at the parent).
std::vector<int> part_preorder(const WeightedGraph& g, const ComponentMap& tree, const Part& part);

// Centralized oracle marker: labels plus partition fields.
std::vector<LabelBundle> mark_all(const WeightedGraph& g, const ComponentMap& tree, const Hierarchy& h);

int part_diameter(const WeightedGraph& g, const ComponentMap& tree, const Part& part);

// Size, diameter, per-level and cover properties of both partitions plus Info coverage.
std::vector<std::string> check_partitions(const WeightedGraph& g, const ComponentMap& tree, const Hierarchy& h,
                                          const Partitions& p);

}  // namespace mstsim
