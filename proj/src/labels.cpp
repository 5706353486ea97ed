#include "mstsim/labels.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>

#include "label_core.hpp"

namespace mstsim {

int ell_from_n(std::uint64_t n) { return n <= 1 ? 0 : floor_log2(n); }
int big_l(std::uint64_t n) { return ceil_log2(n); }

void visit_bundle(LabelBundle& b, RegVisitor& v, const std::string& p) {
    const auto& d = v.dims;
    unsigned cap = static_cast<unsigned>(d.maxlev + 1);
    v.text(p + "ROOTS", b.roots, kRootsAlphabet, cap, 2);
    v.text(p + "ENDP", b.endp, kEndpAlphabet, cap, 2);
    v.text(p + "PARENTS", b.parents, kBitAlphabet, cap, 1);
    v.text(p + "AGG", b.agg, kAggAlphabet, cap, 2);
    v.num(p + "PID", b.pid, d.id);
    v.num(p + "SP.rid", b.sp_rid, d.id);
    v.num(p + "SP.d", b.sp_d, d.cnt);
    v.num(p + "NUMK.n", b.numk_n, d.cnt);
    v.num(p + "NUMK.nv", b.numk_nv, d.cnt);
    v.num(p + "EDIAM.x", b.ediam_x, d.cnt);
    v.num(p + "TOPROOT", b.toproot, d.id);
    v.num(p + "BOTROOT", b.botroot, d.id);
    v.u(p + "JDELIM", b.jdelim, d.lev);
    v.info(p + "PT0", b.pt[0]);
    v.info(p + "PT1", b.pt[1]);
    v.info(p + "PB0", b.pb[0]);
    v.info(p + "PB1", b.pb[1]);
}

namespace core {

void rs_local(const std::string& r, bool is_root, int ell, std::vector<std::string>& out) {
    if (static_cast<int>(r.size()) != ell + 1 || r.find_first_not_of(kRootsAlphabet) != std::string::npos) {
        out.push_back("RS1");
        return;
    }
    bool zero = false, bad0 = false;
    for (char c : r) {
        if (c == '0') zero = true;
        else if (c == '1' && zero) bad0 = true;
    }
    if (bad0) out.push_back("RS0");
    if (is_root && (zero || r.back() != '1')) out.push_back("RS2");
    if (r[0] != '1') out.push_back("RS3");
    if (!is_root && r.back() != '0') out.push_back("RS4");
}

bool rs_parent_ok(const std::string& r, const std::string& pr) {
    if (pr.size() != r.size()) return true;  // the parent reports its own RS1
    for (size_t j = 0; j < r.size(); ++j)
        if (r[j] == '0' && pr[j] == '*') return false;
    return true;
}

bool rs_nest_ok(const std::string& r, const std::string& pr) {
    if (pr.size() != r.size()) return true;
    auto z = r.find('0');
    if (z == std::string::npos) return true;
    for (size_t k = z + 1; k < r.size(); ++k)
        if ((r[k] == '*') != (pr[k] == '*')) return false;
    return true;
}

int agg_expected(char e, const std::vector<Sym>& kids) {
    int s = (e == 'u' || e == 'd') ? 1 : 0;
    for (auto& k : kids)
        if (k.r == '0' && k.a >= '0' && k.a <= '2') s += k.a - '0';
    return std::min(s, 2);
}

bool star_gap(const std::string& r, const std::string& pr, int j) {
    if (pr.size() != r.size()) return false;
    for (size_t k = j + 1; k < r.size(); ++k)
        if (r[k] == '*' && pr[k] != '*') return true;
    return false;
}

void eps_level(const Sym& me, const Sym* par, const std::vector<Sym>& kids, int j, int ell, bool above1, bool gap,
               std::vector<std::string>& out) {
    bool is_root = par == nullptr;
    if (std::string(kEndpAlphabet).find(me.e) == std::string::npos || (me.p != '0' && me.p != '1') || me.a < '0' ||
        me.a > '2') {
        out.push_back("EPS-format");
        return;
    }
    if ((me.e == '*') != (me.r == '*')) out.push_back("EPS-star");
    if (j == ell && me.r != '*' && me.e != 'n') out.push_back("EPS-top");
    if (me.p == '1' && (is_root || par->e != 'd')) out.push_back("EPS0");
    int want = agg_expected(me.e, kids);
    if (me.a - '0' != want) out.push_back("EPS1");
    else if (me.r == '1' && want != (j < ell ? 1 : 0)) out.push_back("EPS1");
    else if (me.r == '*' && want != 0) out.push_back("EPS1");
    if (me.e == 'd') {
        int c = 0;
        for (auto& k : kids) c += k.p == '1';
        if (c != 1) out.push_back("EPS2");
    }
    if (me.e == 'u' && (j >= ell || is_root || me.r != '1' || above1)) out.push_back("EPS3");
    if (me.p == '1' && (me.r == '0' || above1)) out.push_back("EPS4");
    if (me.p == '1' && gap) out.push_back("EPS-nest");
}

}  // namespace core

namespace {

bool lengths_ok(const LabelBundle& b, int ell) {
    auto L = static_cast<size_t>(ell + 1);
    return b.roots.size() == L && b.endp.size() == L && b.parents.size() == L && b.agg.size() == L;
}

std::vector<int> child_ports(const LocalView& x) {
    std::vector<int> out;
    NodeId me = x.g.ids[x.v];
    for (int p = 1; p <= x.g.degree(x.v); ++p)
        if (p != x.parent && x.nb(p).pid == me) out.push_back(p);
    return out;
}

void add(std::vector<Violation>& out, const LocalView& x, const std::string& check, const std::string& detail = "") {
    out.push_back({x.g.ids[x.v], check, detail});
}

}  // namespace

std::vector<Violation> verify_sp(const LocalView& x) {
    std::vector<Violation> out;
    NodeId me = x.g.ids[x.v];
    for (int p = 1; p <= x.g.degree(x.v); ++p)
        if (x.nb(p).sp_rid != x.me.sp_rid) {
            add(out, x, "SP-rid", "port " + std::to_string(p));
            break;
        }
    if (x.parent == 0) {
        if (x.me.sp_d != 0) add(out, x, "SP-dist", "root with d != 0");
        if (x.me.sp_rid != me) add(out, x, "SP-rid", "root id mismatch");
        if (x.me.pid != 0) add(out, x, "SP-echo", "root with parent id");
    } else {
        const auto& P = x.nb(x.parent);
        if (x.me.pid != x.g.ids[x.g.port(x.v, x.parent).nbr]) add(out, x, "SP-echo", "parent id");
        if (x.me.sp_d == 0 || x.me.sp_d != P.sp_d + 1) add(out, x, "SP-dist", "d != d(parent)+1");
        if (x.me.sp_rid == me) add(out, x, "SP-rid", "non-root claims root id");
    }
    return out;
}

std::vector<Violation> verify_numk(const LocalView& x) {
    std::vector<Violation> out;
    for (int p = 1; p <= x.g.degree(x.v); ++p)
        if (x.nb(p).numk_n != x.me.numk_n) {
            add(out, x, "NUMK-agree", "port " + std::to_string(p));
            break;
        }
    std::uint64_t s = 1;
    for (int p : child_ports(x)) s += x.nb(p).numk_nv;
    if (x.me.numk_nv != s) add(out, x, "NUMK-sum");
    if (x.parent == 0 && x.me.numk_nv != x.me.numk_n) add(out, x, "NUMK-root");
    return out;
}

std::vector<Violation> verify_ediam(const LocalView& x) {
    std::vector<Violation> out;
    for (int p = 1; p <= x.g.degree(x.v); ++p)
        if (x.nb(p).ediam_x != x.me.ediam_x) {
            add(out, x, "EDIAM-agree", "port " + std::to_string(p));
            break;
        }
    if (x.me.ediam_x < x.me.sp_d) add(out, x, "EDIAM-bound");
    return out;
}

std::vector<Violation> verify_rs(const LocalView& x) {
    std::vector<Violation> out;
    int ell = ell_from_n(x.me.numk_n);
    std::vector<std::string> codes;
    core::rs_local(x.me.roots, x.parent == 0, ell, codes);
    if (x.parent != 0 && codes.empty()) {
        const auto& pr = x.nb(x.parent).roots;
        if (!core::rs_parent_ok(x.me.roots, pr)) codes.push_back("RS5");
        if (!core::rs_nest_ok(x.me.roots, pr)) codes.push_back("RS-nest");
    }
    for (auto& c : codes) add(out, x, c);
    return out;
}

std::vector<Violation> verify_eps(const LocalView& x) {
    std::vector<Violation> out;
    int ell = ell_from_n(x.me.numk_n);
    if (!lengths_ok(x.me, ell)) {
        add(out, x, "EPS-format", "string length");
        return out;
    }
    const LabelBundle* P = x.parent ? &x.nb(x.parent) : nullptr;
    bool pok = P && lengths_ok(*P, ell);
    std::vector<const LabelBundle*> kids;
    for (int p : child_ports(x)) {
        const auto& u = x.nb(p);
        if (lengths_ok(u, ell)) kids.push_back(&u);
    }
    bool cover = false;
    std::vector<core::Sym> ks;
    for (int j = ell; j >= 0; --j) {
        bool above1 = x.me.roots.find('1', j + 1) != std::string::npos;
        core::Sym me = core::sym(x.me, j);
        core::Sym ps = pok ? core::sym(*P, j) : core::Sym{'0', 'n', '0', '0'};
        ks.clear();
        for (auto* u : kids) ks.push_back(core::sym(*u, j));
        std::vector<std::string> codes;
        bool gap = pok && core::star_gap(x.me.roots, P->roots, j);
        core::eps_level(me, x.parent ? &ps : nullptr, ks, j, ell, above1, gap, codes);
        for (auto& c : codes) add(out, x, c, "level " + std::to_string(j));
        cover = cover || me.p == '1' || me.e == 'u';
    }
    if (x.parent != 0 && !cover) add(out, x, "EPS5");
    return out;
}

std::vector<Violation> verify_structure(const LocalView& x) {
    std::vector<Violation> out;
    for (auto* f : {&verify_sp, &verify_numk, &verify_ediam, &verify_rs, &verify_eps}) {
        auto v = (*f)(x);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

std::vector<Violation> check_labels(const WeightedGraph& g, const ComponentMap& tree,
                                    const std::vector<LabelBundle>& b) {
    std::vector<Violation> out;
    for (int v = 0; v < g.n(); ++v) {
        LocalView x{g, v, tree.parent_port[v], b[v], [&](int p) -> const LabelBundle& { return b[g.port(v, p).nbr]; }};
        auto r = verify_structure(x);
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

int induced_candidate(const LocalView& x, int j) {
    if (j < 0 || j >= static_cast<int>(x.me.endp.size())) return 0;
    char e = x.me.endp[j];
    if (e == 'u') return x.parent;
    if (e != 'd') return 0;
    int found = 0;
    for (int p : child_ports(x)) {
        const auto& u = x.nb(p);
        if (j < static_cast<int>(u.parents.size()) && u.parents[j] == '1') {
            if (found) throw Error("eps2-violation", "several children marked at level " + std::to_string(j));
            found = p;
        }
    }
    return found;
}

std::vector<LabelBundle> mark_labels(const WeightedGraph& g, const ComponentMap& tree, const Hierarchy& h) {
    int n = g.n();
    for (auto& s : check_hierarchy(g, tree, h))
        if (s.find("smaller than 2^level") == std::string::npos) throw Error("invalid-hierarchy", s);
    int ell = h.top;
    std::vector<LabelBundle> b(n);
    std::vector<int> froot(h.frags.size());
    for (size_t f = 0; f < h.frags.size(); ++f) froot[f] = fragment_root(g, tree, h.frags[f]);

    // tree order: parents before children
    int root = -1;
    std::vector<std::vector<int>> kids(n);
    for (int v = 0; v < n; ++v) {
        int p = tree.parent(g, v);
        if (p < 0) root = v;
        else kids[p].push_back(v);
    }
    std::vector<int> order{root};
    for (size_t i = 0; i < order.size(); ++i)
        for (int c : kids[order[i]]) order.push_back(c);
    std::vector<std::uint64_t> depth(n, 0);
    for (int v : order)
        if (v != root) depth[v] = depth[tree.parent(g, v)] + 1;
    std::uint64_t maxd = *std::max_element(depth.begin(), depth.end());

    for (int v = 0; v < n; ++v) {
        auto& x = b[v];
        x.roots.assign(ell + 1, '*');
        x.endp.assign(ell + 1, '*');
        x.parents.assign(ell + 1, '0');
        x.agg.assign(ell + 1, '0');
        int pv = tree.parent(g, v);
        int pe = pv < 0 ? -1 : g.port(v, tree.parent_port[v]).edge;
        for (int j = 0; j <= ell; ++j) {
            int f = h.of(v, j);
            if (f >= 0) {
                x.roots[j] = froot[f] == v ? '1' : '0';
                int c = h.frags[f].cand;
                char e = 'n';
                if (c >= 0 && (g.edges[c].a == v || g.edges[c].b == v)) e = c == pe ? 'u' : 'd';
                x.endp[j] = e;
            }
            if (pv >= 0) {
                int fp = h.of(pv, j);
                if (fp >= 0 && h.frags[fp].cand == pe) x.parents[j] = '1';
            }
        }
        x.pid = pv < 0 ? 0 : g.ids[pv];
        x.sp_rid = g.ids[root];
        x.sp_d = depth[v];
        x.numk_n = static_cast<std::uint64_t>(n);
        x.ediam_x = maxd;
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int v = *it;
        auto& x = b[v];
        x.numk_nv = 1;
        for (int c : kids[v]) x.numk_nv += b[c].numk_nv;
        for (int j = 0; j <= ell; ++j) {
            int s = (x.endp[j] == 'u' || x.endp[j] == 'd') ? 1 : 0;
            for (int c : kids[v])
                if (b[c].roots[j] == '0') s += b[c].agg[j] - '0';
            x.agg[j] = static_cast<char>('0' + std::min(s, 2));
        }
    }
    return b;
}

Hierarchy decode_labels(const WeightedGraph& g, const ComponentMap& tree, const std::vector<LabelBundle>& b, int ell) {
    int n = g.n();
    Hierarchy h;
    h.top = ell;
    for (int j = 0; j <= ell; ++j) {
        // fragment root of each node: climb while the entry is '0' and the parent has a fragment
        std::vector<int> top(n, -1);
        std::function<int(int)> climb = [&](int v) -> int {
            if (top[v] >= 0) return top[v];
            int p = tree.parent(g, v);
            if (b[v].roots[j] == '0' && p >= 0 && b[p].roots[j] != '*') return top[v] = climb(p);
            return top[v] = v;
        };
        std::map<int, std::vector<int>> comp;
        for (int v = 0; v < n; ++v)
            if (b[v].roots[j] != '*') comp[climb(v)].push_back(v);
        for (auto& [r, mem] : comp) {
            Fragment f;
            f.level = j;
            f.members = mem;
            f.alg_root = g.ids[r];
            if (j < ell) {
                int ends = 0, who = -1;
                for (int v : mem)
                    if (b[v].endp[j] == 'u' || b[v].endp[j] == 'd') ++ends, who = v;
                if (ends == 1) {
                    if (b[who].endp[j] == 'u') {
                        if (tree.parent_port[who]) f.cand = g.port(who, tree.parent_port[who]).edge;
                    } else {
                        int marked = 0, e = -1;
                        for (int c = 0; c < n; ++c)
                            if (tree.parent(g, c) == who && b[c].parents[j] == '1')
                                ++marked, e = g.port(c, tree.parent_port[c]).edge;
                        if (marked == 1) f.cand = e;
                    }
                }
            }
            h.frags.push_back(std::move(f));
        }
    }
    h.link(n);
    return h;
}

// ---------------------------------------------------------------------------
// Exhaustive soundness

namespace {

struct SmallTree {
    int n = 0;
    std::vector<int> par;  // par[0] = -1, par[i] < i
};

std::string canon(const SmallTree& t, int v) {
    std::vector<std::string> cs;
    for (int c = 0; c < t.n; ++c)
        if (t.par[c] == v) cs.push_back(canon(t, c));
    std::sort(cs.begin(), cs.end());
    std::string s = "(";
    for (auto& c : cs) s += c;
    return s + ")";
}

std::vector<SmallTree> rooted_trees(int max_n) {
    std::vector<SmallTree> out;
    for (int n = 1; n <= max_n; ++n) {
        std::map<std::string, SmallTree> uniq;
        SmallTree t;
        t.n = n;
        t.par.assign(n, -1);
        std::function<void(int)> rec = [&](int i) {
            if (i == n) {
                uniq.emplace(canon(t, 0), t);
                return;
            }
            for (int p = 0; p < i; ++p) {
                t.par[i] = p;
                rec(i + 1);
            }
        };
        rec(1);
        for (auto& [k, v] : uniq) out.push_back(v);
    }
    return out;
}

std::vector<std::string> all_strings(const std::string& alpha, int len) {
    std::vector<std::string> out{""};
    for (int i = 0; i < len; ++i) {
        std::vector<std::string> nx;
        for (auto& s : out)
            for (char c : alpha) nx.push_back(s + c);
        out.swap(nx);
    }
    return out;
}

// One legal (EndP, PARENTS, AGG) column at one level, grouped by what the later checks depend on.
struct ColGroup {
    std::uint64_t count = 0;
    std::string e, p, a;  // representative column
};

class Exhaust {
public:
    Exhaust(const SmallTree& t, int ell, SoundnessReport& rep) : t_(t), ell_(ell), rep_(rep) {
        for (int i = 0; i < t.n; ++i) g_.add_node(static_cast<NodeId>(i + 1));
        tree_.parent_port.assign(t.n, 0);
        kids_.assign(t.n, {});
        for (int i = 1; i < t.n; ++i) {
            g_.add_edge(i, t.par[i], static_cast<Weight>(i));
            tree_.parent_port[i] = g_.port_to(i, t.par[i]);
            kids_[t.par[i]].push_back(i);
        }
        for (auto& s : all_strings(kRootsAlphabet, ell + 1)) {
            std::vector<std::string> c;
            core::rs_local(s, true, ell, c);
            if (c.empty()) root_opts_.push_back(s);
            c.clear();
            core::rs_local(s, false, ell, c);
            if (c.empty()) inner_opts_.push_back(s);
        }
    }

    void run() {
        roots_.assign(t_.n, "");
        assign(0);
    }

private:
    const SmallTree& t_;
    int ell_;
    SoundnessReport& rep_;
    WeightedGraph g_;
    ComponentMap tree_;
    std::vector<std::vector<int>> kids_;
    std::vector<std::string> root_opts_, inner_opts_, roots_;
    std::map<std::string, std::vector<ColGroup>> memo_;

    void fail(std::uint64_t& counter, std::uint64_t k, const std::string& what) {
        counter += k;
        if (rep_.examples.size() < 8) {
            std::string s = what + " n=" + std::to_string(t_.n) + " ell=" + std::to_string(ell_) + " roots=";
            for (auto& r : roots_) s += r + " ";
            rep_.examples.push_back(s);
        }
    }

    void assign(int i) {
        if (i == t_.n) {
            evaluate();
            return;
        }
        for (auto& s : i == 0 ? root_opts_ : inner_opts_) {
            if (i > 0 && !core::rs_parent_ok(s, roots_[t_.par[i]])) continue;
            roots_[i] = s;
            assign(i + 1);
        }
    }

    std::vector<LabelBundle> bundles() const {
        std::vector<LabelBundle> b(t_.n);
        for (int v = 0; v < t_.n; ++v) {
            b[v].roots = roots_[v];
            b[v].pid = v ? g_.ids[t_.par[v]] : 0;
            b[v].numk_n = std::uint64_t{1} << ell_;
        }
        return b;
    }

    bool hierarchy_ok(const std::vector<LabelBundle>& b) const {
        auto h = decode_labels(g_, tree_, b, ell_);
        // size and height clauses tie levels to n; here ell is chosen independently of n
        for (auto& s : check_hierarchy(g_, tree_, h))
            if (s.find("smaller than 2^level") == std::string::npos && s.find("height") == std::string::npos)
                return false;
        return true;
    }

    void evaluate() {
        auto b = bundles();
        for (auto& bb : b) bb.endp = bb.parents = bb.agg = std::string(ell_ + 1, '0');
        bool nest = true;
        for (int v = 1; v < t_.n; ++v) nest = nest && core::rs_nest_ok(roots_[v], roots_[t_.par[v]]);
        if (!nest) {
            ++rep_.rs_base_only;
            if (!hierarchy_ok(b)) ++rep_.rs_base_only_nonlaminar;
            return;
        }
        ++rep_.roots_legal;
        bool hok = hierarchy_ok(b);
        if (!hok) fail(rep_.hierarchy_failures, 1, "hierarchy");

        std::vector<const std::vector<ColGroup>*> levels;
        for (int j = 0; j <= ell_; ++j) levels.push_back(&columns(j));
        std::vector<int> pick(ell_ + 1, 0);
        std::function<void(int, std::uint64_t)> rec = [&](int j, std::uint64_t mult) {
            if (j > ell_) {
                combine(b, levels, pick, mult, hok);
                return;
            }
            for (size_t k = 0; k < levels[j]->size(); ++k) {
                pick[j] = static_cast<int>(k);
                rec(j + 1, mult * (*levels[j])[k].count);
            }
        };
        rec(0, 1);
    }

    void combine(std::vector<LabelBundle>& b, const std::vector<const std::vector<ColGroup>*>& levels,
                 const std::vector<int>& pick, std::uint64_t mult, bool hok) {
        for (int v = 0; v < t_.n; ++v)
            for (int j = 0; j <= ell_; ++j) {
                auto& c = (*levels[j])[pick[j]];
                b[v].endp[j] = c.e[v];
                b[v].parents[j] = c.p[v];
                b[v].agg[j] = c.a[v];
            }
        // cross-level clause through the production verifier
        for (int v = 0; v < t_.n; ++v) {
            LocalView x{g_, v, tree_.parent_port[v], b[v],
                        [&](int p) -> const LabelBundle& { return b[g_.port(v, p).nbr]; }};
            if (!verify_rs(x).empty() || !verify_eps(x).empty()) return;
        }
        rep_.full_legal += mult;
        if (!hok) return;
        auto h = decode_labels(g_, tree_, b, ell_);
        auto cc = check_candidates(g_, tree_, h, false);
        if (!cc.empty()) {
            std::string d = "candidate (" + cc[0] + ") par=";
            for (int v = 0; v < t_.n; ++v) d += std::to_string(t_.par[v]) + ",";
            d += " endp/parents=";
            for (auto& x : b) d += x.endp + "/" + x.parents + " ";
            fail(rep_.candidate_failures, mult, d);
        }
    }

    // Legal columns at level j, grouped by (induced candidate per fragment, EPS5 cover set).
    const std::vector<ColGroup>& columns(int j) {
        std::string key = std::to_string(j) + ":";
        for (int v = 0; v < t_.n; ++v) {
            key += roots_[v][j];
            key += roots_[v].find('1', j + 1) != std::string::npos ? '^' : '.';
            key += v && core::star_gap(roots_[v], roots_[t_.par[v]], j) ? 'g' : '.';
        }
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        int n = t_.n;
        std::map<std::pair<std::vector<int>, unsigned>, ColGroup> groups;
        std::vector<core::Sym> s(n);
        std::uint64_t total = 1;
        for (int v = 0; v < n; ++v) total *= 8;
        for (std::uint64_t code = 0; code < total; ++code) {
            std::uint64_t c = code;
            for (int v = 0; v < n; ++v) {
                s[v].r = roots_[v][j];
                s[v].e = kEndpAlphabet[c % 4];
                s[v].p = kBitAlphabet[(c / 4) % 2];
                c /= 8;
            }
            // AGG is checked for equality with a function of the children's entries, so the
            // only column that can pass is the computed one.
            std::vector<core::Sym> ks;
            for (int v = n - 1; v >= 0; --v) {
                ks.clear();
                for (int u : kids_[v]) ks.push_back(s[u]);
                s[v].a = static_cast<char>('0' + core::agg_expected(s[v].e, ks));
            }
            bool ok = true;
            std::vector<std::string> codes;
            for (int v = 0; v < n && ok; ++v) {
                ks.clear();
                for (int u : kids_[v]) ks.push_back(s[u]);
                bool above1 = roots_[v].find('1', j + 1) != std::string::npos;
                bool gap = v && core::star_gap(roots_[v], roots_[t_.par[v]], j);
                core::eps_level(s[v], v ? &s[t_.par[v]] : nullptr, ks, j, ell_, above1, gap, codes);
                ok = codes.empty();
            }
            if (!ok) continue;
            std::vector<int> cand(n, -2);
            unsigned cover = 0;
            for (int v = 0; v < n; ++v) {
                if (s[v].p == '1' || s[v].e == 'u') cover |= 1u << v;
                if (s[v].e == 'u') cand[v] = v;
                if (s[v].e == 'd')
                    for (int u : kids_[v])
                        if (s[u].p == '1') cand[v] = u;
            }
            auto& grp = groups[{cand, cover}];
            if (grp.count++ == 0)
                for (int v = 0; v < n; ++v) grp.e += s[v].e, grp.p += s[v].p, grp.a += s[v].a;
        }
        std::vector<ColGroup> out;
        for (auto& [k, v] : groups) out.push_back(v);
        return memo_[key] = std::move(out);
    }
};

}  // namespace

SoundnessReport exhaustive_label_soundness(int max_n, int max_ell) {
    SoundnessReport rep;
    auto trees = rooted_trees(max_n);
    rep.trees = trees.size();
    for (auto& t : trees)
        for (int ell = 0; ell <= max_ell; ++ell) {
            Exhaust ex(t, ell, rep);
            ex.run();
        }
    return rep;
}

}  // namespace mstsim
