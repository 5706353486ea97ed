#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace mstsim {

using NodeId = std::uint64_t;
using Weight = std::uint64_t;

struct Error : std::runtime_error {
    std::string code;
    Error(std::string c, const std::string& what) : std::runtime_error(what), code(std::move(c)) {}
};

// One adjacency entry. Port numbers are 1-based: port p at v is adj[v][p-1].
struct Port {
    int nbr = -1;    // node index of the neighbour
    int back = 0;    // port number of this edge at the neighbour
    int edge = -1;   // index into WeightedGraph::edges
    Weight w = 0;
};

struct Edge {
    int a = -1, b = -1;
    int pa = 0, pb = 0;
    Weight w = 0;
    int other(int v) const { return v == a ? b : a; }
};

class WeightedGraph {
public:
    std::vector<NodeId> ids;
    std::vector<std::vector<Port>> adj;
    std::vector<Edge> edges;

    int n() const { return static_cast<int>(ids.size()); }
    int m() const { return static_cast<int>(edges.size()); }
    int degree(int v) const { return static_cast<int>(adj[v].size()); }
    int max_degree() const;
    NodeId max_id() const;
    Weight max_weight() const;

    int add_node(NodeId id);
    // Appends the edge at the next free port of both endpoints.
    int add_edge(int a, int b, Weight w);
    // Inserts with explicit port numbers (file input); ports may arrive out of order.
    int add_edge_ports(int a, int pa, int b, int pb, Weight w);

    int index_of(NodeId id) const;  // -1 if absent
    const Port& port(int v, int p) const { return adj[v][p - 1]; }
    int port_to(int v, int u) const;  // port at v leading to u, 0 if not adjacent
    void rebuild_index();

    bool operator==(const WeightedGraph& o) const;

private:
    std::unordered_map<NodeId, int> index_;
};

// c(v): parent port per node, 0 for "root".
struct ComponentMap {
    std::vector<int> parent_port;

    int parent(const WeightedGraph& g, int v) const {
        int p = parent_port[v];
        return p == 0 ? -1 : g.port(v, p).nbr;
    }
    bool operator==(const ComponentMap& o) const { return parent_port == o.parent_port; }
};

enum class GraphKind { RandomConnected, Path, Star, Grid, Complete };

GraphKind parse_graph_kind(const std::string& s);
std::string to_string(GraphKind k);

WeightedGraph generate_graph(GraphKind kind, int n, std::uint64_t seed);

// Edge indices of H(G): an edge is present iff at least one endpoint links over it.
std::vector<int> subgraph_edges(const WeightedGraph& g, const ComponentMap& c);
bool is_spanning_tree(const WeightedGraph& g, const ComponentMap& c);
// Orients an undirected edge set as a tree rooted at `root`.
ComponentMap orient_tree(const WeightedGraph& g, const std::vector<int>& tree_edges, int root);

struct PerturbKey {
    Weight w;
    int not_in_tree;
    NodeId id_min, id_max;
    auto operator<=>(const PerturbKey&) const = default;
};
PerturbKey perturb_key(const WeightedGraph& g, int edge, const std::vector<char>& in_tree);
// Weights replaced by the rank of their perturbation key (1..m).
WeightedGraph perturb_weights(const WeightedGraph& g, const ComponentMap& tree);
WeightedGraph perturb_weights(const WeightedGraph& g, const std::vector<int>& tree_edges);

// Hop distance from the nearest source; -1 where unreachable.
std::vector<int> bfs_distances(const WeightedGraph& g, const std::vector<int>& sources);

std::vector<int> kruskal_oracle(const WeightedGraph& g);
std::vector<int> prim_oracle(const WeightedGraph& g);
Weight total_weight(const WeightedGraph& g, const std::vector<int>& es);

std::vector<std::string> validate_graph(const WeightedGraph& g);
bool weights_distinct(const WeightedGraph& g);

std::string serialize_graph(const WeightedGraph& g);
WeightedGraph parse_graph(const std::string& text);
std::string serialize_components(const WeightedGraph& g, const ComponentMap& c);
ComponentMap parse_components(const WeightedGraph& g, const std::string& text);

// "random:n=64:seed=7", "path:n=8", "grid:n=16:seed=1" or a file path.
WeightedGraph graph_from_spec(const std::string& spec);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace mstsim
