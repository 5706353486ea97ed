#include <fstream>
#include <map>
#include <sstream>

#include "mstsim/graph.hpp"

namespace mstsim {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("io", "cannot write " + path);
    out << text;
}

std::string serialize_graph(const WeightedGraph& g) {
    std::ostringstream os;
    os << g.n() << ' ' << g.m() << '\n';
    for (auto id : g.ids) os << "node " << id << '\n';
    for (auto& e : g.edges)
        os << "edge " << g.ids[e.a] << ' ' << e.pa << ' ' << g.ids[e.b] << ' ' << e.pb << ' ' << e.w << '\n';
    return os.str();
}

namespace {
[[noreturn]] void fail(int line, const std::string& msg) {
    throw Error("parse", "line " + std::to_string(line) + ": " + msg);
}
}  // namespace

WeightedGraph parse_graph(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    long n = -1, m = -1;
    WeightedGraph g;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        if (n < 0) {
            if (!(ls >> n >> m) || n < 0 || m < 0) fail(lineno, "expected header 'n m'");
            continue;
        }
        std::string kw;
        ls >> kw;
        if (kw == "node") {
            NodeId id;
            if (!(ls >> id)) fail(lineno, "bad node line");
            if (g.index_of(id) >= 0) fail(lineno, "duplicate id " + std::to_string(id));
            g.add_node(id);
        } else if (kw == "edge") {
            NodeId a, b;
            int pa, pb;
            Weight w;
            if (!(ls >> a >> pa >> b >> pb >> w)) fail(lineno, "bad edge line");
            int ia = g.index_of(a), ib = g.index_of(b);
            if (ia < 0 || ib < 0) fail(lineno, "edge references unknown node");
            try {
                g.add_edge_ports(ia, pa, ib, pb, w);
            } catch (const Error& e) {
                fail(lineno, e.what());
            }
        } else {
            fail(lineno, "unknown keyword '" + kw + "'");
        }
    }
    if (n < 0) fail(lineno, "missing header");
    if (g.n() != n) fail(lineno, "header says " + std::to_string(n) + " nodes, found " + std::to_string(g.n()));
    if (g.m() != m) fail(lineno, "header says " + std::to_string(m) + " edges, found " + std::to_string(g.m()));
    for (int v = 0; v < g.n(); ++v)
        for (int p = 1; p <= g.degree(v); ++p)
            if (g.port(v, p).nbr < 0) fail(lineno, "port gap at node " + std::to_string(g.ids[v]));
    return g;
}

std::string serialize_components(const WeightedGraph& g, const ComponentMap& c) {
    std::ostringstream os;
    for (int v = 0; v < g.n(); ++v) {
        os << "comp " << g.ids[v] << ' ';
        if (c.parent_port[v] == 0) os << "root";
        else os << c.parent_port[v];
        os << '\n';
    }
    return os.str();
}

ComponentMap parse_components(const WeightedGraph& g, const std::string& text) {
    ComponentMap c;
    c.parent_port.assign(g.n(), -1);
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string kw, val;
        NodeId id;
        if (!(ls >> kw >> id >> val) || kw != "comp") fail(lineno, "expected 'comp <id> <port|root>'");
        int v = g.index_of(id);
        if (v < 0) fail(lineno, "unknown node " + std::to_string(id));
        if (val == "root") {
            c.parent_port[v] = 0;
        } else {
            int p = 0;
            try {
                p = std::stoi(val);
            } catch (...) {
                fail(lineno, "bad port '" + val + "'");
            }
            if (p < 1 || p > g.degree(v)) fail(lineno, "port out of range");
            c.parent_port[v] = p;
        }
    }
    for (int v = 0; v < g.n(); ++v)
        if (c.parent_port[v] < 0) fail(lineno, "missing comp line for node " + std::to_string(g.ids[v]));
    return c;
}

WeightedGraph graph_from_spec(const std::string& spec) {
    auto colon = spec.find(':');
    std::string head = spec.substr(0, colon);
    bool generator = false;
    try {
        parse_graph_kind(head);
        generator = colon != std::string::npos;
    } catch (const Error&) {
    }
    if (!generator) return parse_graph(read_file(spec));
    std::map<std::string, std::string> kv;
    std::string rest = spec.substr(colon + 1);
    std::istringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ':')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw Error("parse", "bad graph spec item '" + item + "'");
        kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    if (!kv.count("n")) throw Error("parse", "graph spec needs n=");
    int n;
    std::uint64_t seed = 1;
    try {
        n = std::stoi(kv["n"]);
        if (kv.count("seed")) seed = std::stoull(kv["seed"]);
    } catch (...) {
        throw Error("parse", "bad number in graph spec '" + spec + "'");
    }
    return generate_graph(parse_graph_kind(head), n, seed);
}

}  // namespace mstsim
