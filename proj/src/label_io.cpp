#include <sstream>
#include <tuple>

#include "mstsim/labels.hpp"

namespace mstsim {

namespace {

std::string info_text(const Info& x) { return to_string(x); }

Info parse_info(const std::string& s, int line) {
    Info x;
    if (s == "none") return x;
    std::istringstream is(s);
    std::string z, l, w;
    if (!std::getline(is, z, ',') || !std::getline(is, l, ',') || !std::getline(is, w))
        throw Error("parse", "labels line " + std::to_string(line) + ": bad info '" + s + "'");
    x.present = true;
    x.z = std::stoull(z);
    x.lev = static_cast<std::uint32_t>(std::stoul(l));
    x.w = w == "inf" ? kInfWeight : std::stoull(w);
    return x;
}

std::pair<std::uint64_t, std::uint64_t> parse_pair(const std::string& s, int line) {
    auto c = s.find(',');
    if (c == std::string::npos) throw Error("parse", "labels line " + std::to_string(line) + ": expected a,b");
    return {std::stoull(s.substr(0, c)), std::stoull(s.substr(c + 1))};
}

}  // namespace

std::string serialize_labels(const WeightedGraph& g, const std::vector<LabelBundle>& b) {
    std::ostringstream os;
    for (int v = 0; v < g.n(); ++v) {
        auto& x = b[v];
        os << "label " << g.ids[v] << " ROOTS=" << x.roots << " ENDP=" << x.endp << " PARENTS=" << x.parents
           << " AGG=" << x.agg << " SP=" << x.sp_rid << ',' << x.sp_d << " PID=" << x.pid << " NUMK=" << x.numk_n
           << ',' << x.numk_nv << " EDIAM=" << x.ediam_x << " TOPROOT=" << x.toproot << " BOTROOT=" << x.botroot
           << " JDELIM=" << x.jdelim;
        const char* names[4] = {"PT0", "PT1", "PB0", "PB1"};
        const Info* infos[4] = {&x.pt[0], &x.pt[1], &x.pb[0], &x.pb[1]};
        for (int k = 0; k < 4; ++k)
            if (infos[k]->present) os << ' ' << names[k] << '=' << info_text(*infos[k]);
        os << '\n';
    }
    return os.str();
}

std::vector<LabelBundle> parse_labels(const WeightedGraph& g, const std::string& text) {
    std::vector<LabelBundle> b(g.n());
    std::vector<char> seen(g.n(), 0);
    std::istringstream in(text);
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        auto h = line.find('#');
        if (h != std::string::npos) line.resize(h);
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw)) continue;
        if (kw != "label") throw Error("parse", "labels line " + std::to_string(ln) + ": expected 'label'");
        NodeId id;
        if (!(ls >> id)) throw Error("parse", "labels line " + std::to_string(ln) + ": missing id");
        int v = g.index_of(id);
        if (v < 0) throw Error("parse", "labels line " + std::to_string(ln) + ": unknown id " + std::to_string(id));
        seen[v] = 1;
        auto& x = b[v];
        std::string kv;
        try {
            while (ls >> kv) {
                auto eq = kv.find('=');
                if (eq == std::string::npos) throw Error("parse", "labels line " + std::to_string(ln) + ": bad field " + kv);
                auto k = kv.substr(0, eq), val = kv.substr(eq + 1);
                if (k == "ROOTS") x.roots = val;
                else if (k == "ENDP") x.endp = val;
                else if (k == "PARENTS") x.parents = val;
                else if (k == "AGG") x.agg = val;
                else if (k == "SP") std::tie(x.sp_rid, x.sp_d) = parse_pair(val, ln);
                else if (k == "PID") x.pid = std::stoull(val);
                else if (k == "NUMK") std::tie(x.numk_n, x.numk_nv) = parse_pair(val, ln);
                else if (k == "EDIAM") x.ediam_x = std::stoull(val);
                else if (k == "TOPROOT") x.toproot = std::stoull(val);
                else if (k == "BOTROOT") x.botroot = std::stoull(val);
                else if (k == "JDELIM") x.jdelim = std::stoi(val);
                else if (k == "PT0") x.pt[0] = parse_info(val, ln);
                else if (k == "PT1") x.pt[1] = parse_info(val, ln);
                else if (k == "PB0") x.pb[0] = parse_info(val, ln);
                else if (k == "PB1") x.pb[1] = parse_info(val, ln);
                else throw Error("parse", "labels line " + std::to_string(ln) + ": unknown field " + k);
            }
        } catch (const std::logic_error&) {
            throw Error("parse", "labels line " + std::to_string(ln) + ": bad number in " + kv);
        }
    }
    for (int v = 0; v < g.n(); ++v)
        if (!seen[v]) throw Error("parse", "labels: no line for node " + std::to_string(g.ids[v]));
    return b;
}

}  // namespace mstsim
