#include "mstsim/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

#include "mstsim/marker.hpp"

namespace mstsim {

std::string to_string(Mode m) {
    switch (m) {
        case Mode::Construct: return "construct";
        case Mode::VerifyOnly: return "verify-only";
        case Mode::Selfstab: return "selfstab";
        case Mode::TrainsBench: return "trains-bench";
    }
    return "?";
}

Mode parse_mode(const std::string& s) {
    for (auto m : {Mode::Construct, Mode::VerifyOnly, Mode::Selfstab, Mode::TrainsBench})
        if (to_string(m) == s) return m;
    throw Error("parse", "unknown mode '" + s + "'");
}

nlohmann::json to_json(const Scenario& s) {
    return {{"graph", s.graph},
            {"mode", to_string(s.mode)},
            {"scheduler", s.sched == SchedMode::Async ? "async" : "sync"},
            {"fairness", s.fairness},
            {"seed", s.seed},
            {"labels", s.labels},
            {"faults", s.faults},
            {"randomize", s.randomize},
            {"post_faults", s.post_faults},
            {"horizon", s.horizon},
            {"budget_bits", s.budget_bits}};
}

Scenario scenario_from_json(const nlohmann::json& j) {
    Scenario s;
    if (!j.is_object()) throw Error("parse", "scenario must be a JSON object");
    static const std::vector<std::string> keys = {"graph",     "mode",        "scheduler", "fairness",
                                                  "seed",      "labels",      "faults",    "randomize",
                                                  "post_faults", "horizon",   "budget_bits"};
    for (auto& [k, v] : j.items())
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw Error("parse", "unknown scenario key '" + k + "'");
    std::string key;
    try {
        key = "graph";
        s.graph = j.at("graph").get<std::string>();
        key = "mode";
        if (j.contains(key)) s.mode = parse_mode(j[key].get<std::string>());
        key = "scheduler";
        if (j.contains(key)) {
            auto x = j[key].get<std::string>();
            if (x != "sync" && x != "async") throw Error("parse", "scheduler must be sync or async");
            s.sched = x == "async" ? SchedMode::Async : SchedMode::Sync;
        }
        key = "fairness";
        if (j.contains(key)) s.fairness = j[key].get<int>();
        key = "seed";
        if (j.contains(key)) s.seed = j[key].get<std::uint64_t>();
        key = "labels";
        if (j.contains(key)) s.labels = j[key].get<std::string>();
        key = "faults";
        if (j.contains(key)) s.faults = j[key].get<std::string>();
        key = "randomize";
        if (j.contains(key)) s.randomize = j[key].get<bool>();
        key = "post_faults";
        if (j.contains(key)) s.post_faults = j[key].get<int>();
        key = "horizon";
        if (j.contains(key)) s.horizon = j[key].get<std::uint64_t>();
        key = "budget_bits";
        if (j.contains(key)) s.budget_bits = j[key].get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error("parse", "scenario key '" + key + "': " + e.what());
    }
    return s;
}

namespace {

double log2n(int n) { return std::log2(std::max(2, n)); }

std::vector<int> sorted_edges(const WeightedGraph& g, const ComponentMap& c) {
    auto e = subgraph_edges(g, c);
    std::sort(e.begin(), e.end());
    return e;
}

std::vector<int> sorted_mst(const WeightedGraph& g) {
    auto e = kruskal_oracle(g);
    std::sort(e.begin(), e.end());
    return e;
}

std::string alarm_line(const TraceEvent& e) {
    std::string code = e.detail;
    auto p = code.find("check=");
    if (p != std::string::npos) code = code.substr(p + 6);
    code = code.substr(0, code.find(' '));
    return "alarm node=" + std::to_string(e.node) + " t=" + std::to_string(e.t) + " check=" + code;
}

void collect_alarms(const Trace& t, RunResult& r) {
    std::map<std::string, int> by;
    for (auto* e : t.of_kind("alarm")) {
        auto line = alarm_line(*e);
        r.alarms.push_back(line);
        ++by[line.substr(line.find("check=") + 6)];
    }
    r.metrics["alarms"] = r.alarms.size();
    r.metrics["alarms_by_check"] = by;
}

std::vector<FaultEvent> load_faults(const std::string& path) {
    if (path.empty()) return {};
    return parse_faults(read_file(path));
}

ComponentMap tree_from_pids(const WeightedGraph& g, const std::vector<LabelBundle>& b) {
    ComponentMap c;
    c.parent_port.assign(g.n(), 0);
    for (int v = 0; v < g.n(); ++v) {
        if (b[v].pid == 0) continue;
        int u = g.index_of(b[v].pid);
        int p = u < 0 ? 0 : g.port_to(v, u);
        if (p == 0) throw Error("parse", "node " + std::to_string(g.ids[v]) + ": pid is not a neighbour");
        c.parent_port[v] = p;
    }
    return c;
}

RunResult run_construct(const Scenario& s, const WeightedGraph& g, TraceLevel lvl) {
    RunResult r;
    const int n = g.n();
    r.metrics["n"] = n;
    r.metrics["m"] = g.m();
    if (s.sched == SchedMode::Sync) {
        auto mr = run_marker(g, lvl);
        bool tree_ok = sorted_edges(g, mr.tree) == sorted_mst(g);
        auto viol = check_labels(g, mr.tree, mr.bundles);
        r.metrics["alg_rounds"] = mr.alg_rounds;
        r.metrics["total_rounds"] = mr.total_rounds;
        r.metrics["alg_rounds_per_n"] = static_cast<double>(mr.alg_rounds) / n;
        r.metrics["peak_bits"] = mr.peak_bits;
        r.metrics["bits_per_log2n"] = mr.peak_bits / log2n(n);
        r.metrics["tree_ok"] = tree_ok;
        r.metrics["label_violations"] = viol.size();
        r.metrics["problems"] = mr.problems;
        r.pass = tree_ok && viol.empty() && mr.problems.empty() && mr.alg_rounds <= 44ull * n;
        r.tree = serialize_components(g, mr.tree);
        r.labels = serialize_labels(g, mr.bundles);
        r.trace = std::move(mr.trace);
        return r;
    }
    SelfstabConfig cfg;
    cfg.async = true;
    cfg.seed = s.seed;
    cfg.fairness = s.fairness;
    cfg.horizon = s.horizon;
    cfg.budget_bits = s.budget_bits;
    auto v = run_selfstab(g, cfg, &r.trace, lvl);
    r.metrics["construct_time"] = v.convergence_time;
    r.metrics["peak_bits"] = v.peak_bits;
    r.metrics["tree_ok"] = v.tree_ok;
    r.pass = v.converged;
    return r;
}

RunResult run_verify_only(const Scenario& s, const WeightedGraph& g, TraceLevel lvl) {
    RunResult r;
    ComponentMap tree;
    std::vector<LabelBundle> b;
    if (s.labels.empty()) {
        auto c = certify(g);
        tree = c.tree;
        b = c.bundles;
    } else {
        b = parse_labels(g, read_file(s.labels));
        tree = tree_from_pids(g, b);
    }
    const bool async = s.sched == SchedMode::Async;
    double l = log2n(g.n());
    std::uint64_t horizon = s.horizon ? s.horizon : static_cast<std::uint64_t>(100 * l * l);
    auto faults = load_faults(s.faults);
    std::uint64_t tf = 0;
    std::vector<int> fnodes;
    for (auto& f : faults) {
        tf = std::max(tf, f.time);
        fnodes.push_back(g.index_of(f.node));
    }
    Simulator<VerifierProgram> sim(g, VerifierProgram{verifier_start(g, tree, b), {async}},
                                   Scheduler{s.sched, s.seed, s.fairness}, faults, lvl);
    sim.budget = s.budget_bits;
    sim.run(horizon);
    r.metrics["n"] = g.n();
    r.metrics["horizon"] = horizon;
    r.metrics["peak_bits"] = sim.peak_bits;
    collect_alarms(sim.trace, r);
    if (faults.empty()) {
        r.pass = r.alarms.empty();
    } else {
        auto d = measure_detection(g, sim.trace, tf, fnodes);
        r.metrics["detected"] = d.detected;
        r.metrics["detection_time"] = d.time;
        r.metrics["detection_distance"] = d.distance;
        r.pass = d.detected;
    }
    r.trace = std::move(sim.trace);
    return r;
}

RunResult run_selfstab_mode(const Scenario& s, const WeightedGraph& g, TraceLevel lvl) {
    RunResult r;
    SelfstabConfig cfg;
    cfg.async = s.sched == SchedMode::Async;
    cfg.seed = s.seed;
    cfg.fairness = s.fairness;
    cfg.randomize_init = s.randomize;
    cfg.faults = load_faults(s.faults);
    cfg.post_faults = s.post_faults;
    cfg.horizon = s.horizon;
    cfg.budget_bits = s.budget_bits;
    auto v = run_selfstab(g, cfg, &r.trace, lvl);
    r.metrics = nlohmann::json::parse(v.to_json());
    r.metrics["n"] = g.n();
    collect_alarms(r.trace, r);
    r.pass = v.converged;
    return r;
}

RunResult run_trains(const Scenario& s, const WeightedGraph& g) {
    RunResult r;
    auto c = certify(g);
    const bool async = s.sched == SchedMode::Async;
    auto tm = train_timing(g.n(), async);
    double l = log2n(g.n());
    std::uint64_t dh = s.horizon ? s.horizon : 12 * tm.cycle;
    auto delivery = train_delivery(g, c, async, s.seed, 2 * tm.cycle, dh);
    auto compare = compare_completion(g, c, async, s.seed, s.horizon ? s.horizon : static_cast<std::uint64_t>(400 * l * l));
    r.metrics["n"] = g.n();
    r.metrics["delivery"] = delivery;
    r.metrics["delivery_per_log2n"] = delivery / l;
    r.metrics["compare"] = compare;
    r.metrics["compare_per_log2n_sq"] = compare / (l * l);
    r.metrics["cycle_bound"] = tm.cycle;
    r.pass = delivery > 0 && compare > 0;
    return r;
}

}  // namespace

RunResult run_scenario(const Scenario& s, TraceLevel lvl) {
    auto g = graph_from_spec(s.graph);
    auto problems = validate_graph(g);
    if (!problems.empty()) throw Error("invalid-graph", problems.front());
    RunResult r;
    switch (s.mode) {
        case Mode::Construct: r = run_construct(s, g, lvl); break;
        case Mode::VerifyOnly: r = run_verify_only(s, g, lvl); break;
        case Mode::Selfstab: r = run_selfstab_mode(s, g, lvl); break;
        case Mode::TrainsBench: r = run_trains(s, g); break;
    }
    r.metrics["mode"] = to_string(s.mode);
    r.metrics["pass"] = r.pass;
    r.graph = serialize_graph(g);
    return r;
}

namespace {

CampaignRow campaign_one(const CampaignSpec& c, int n, std::uint64_t seed) {
    CampaignRow row{n, seed, false, 0, ""};
    Scenario s = c.base;
    s.graph = c.graph_kind + ":n=" + std::to_string(n) + ":seed=" + std::to_string(seed);
    s.seed = seed;
    try {
        if (s.mode == Mode::VerifyOnly) {
            auto g = graph_from_spec(s.graph);
            auto k = parse_corruption(c.corruption);
            const bool async = s.sched == SchedMode::Async;
            auto cert = k == Corruption::NonMinimal ? nonminimal_certificate(g) : certify(g);
            double l = log2n(n);
            auto run = detect_run(g, cert, k, async, seed, 1, s.horizon ? s.horizon : static_cast<std::uint64_t>(400 * l * l));
            row.ok = run.d.detected && run.local && run.clean_before;
            row.value = static_cast<double>(run.d.time);
            row.note = "distance=" + std::to_string(run.d.distance);
            return row;
        }
        auto r = run_scenario(s);
        row.ok = r.pass;
        const auto& m = r.metrics;
        auto num = [&](const char* key) { return m.contains(key) ? m[key].get<double>() : 0.0; };
        if (c.metric == "rounds") row.value = num(s.sched == SchedMode::Sync ? "alg_rounds" : "construct_time");
        else if (c.metric == "bits") row.value = num("peak_bits");
        else if (c.metric == "delivery") row.value = num("delivery");
        else if (c.metric == "compare") row.value = num("compare");
        else if (c.metric == "convergence") row.value = num("convergence_time");
        else throw Error("invalid-parameter", "unknown metric " + c.metric);
    } catch (const Error& e) {
        row.ok = false;
        row.note = e.what();
    }
    return row;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    size_t k = v.size() / 2;
    return v.size() % 2 ? v[k] : (v[k - 1] + v[k]) / 2;
}

std::string fmt_double(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

}  // namespace

CampaignResult run_campaign(const CampaignSpec& c) {
    if (c.sizes.empty() || c.seeds.empty()) throw Error("invalid-parameter", "empty sweep");
    if (c.metric.empty() && c.base.mode != Mode::VerifyOnly) throw Error("invalid-parameter", "campaign needs a metric");
    std::vector<std::pair<int, std::uint64_t>> jobs;
    for (int n : c.sizes)
        for (auto s : c.seeds) jobs.push_back({n, s});
    CampaignResult out;
    out.rows.resize(jobs.size());
    std::atomic<size_t> next{0};
    int threads = c.threads > 0 ? c.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<int>(threads, static_cast<int>(jobs.size()));
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (size_t i; (i = next++) < jobs.size();) out.rows[i] = campaign_one(c, jobs[i].first, jobs[i].second);
        });
    for (auto& t : pool) t.join();

    std::ostringstream runs, sum;
    runs << "n,seed,ok,value,note\n";
    for (auto& r : out.rows) runs << r.n << ',' << r.seed << ',' << (r.ok ? 1 : 0) << ',' << fmt_double(r.value) << ",\"" << r.note << "\"\n";
    sum << "n,runs,failures,median,ratio,per_log2n,per_log2n_sq,per_n\n";
    out.ok = true;
    double prev = 0;
    int prev_n = 0;
    for (int n : c.sizes) {
        std::vector<double> vals;
        int fails = 0, runs_n = 0;
        for (auto& r : out.rows)
            if (r.n == n) {
                ++runs_n;
                if (r.ok) vals.push_back(r.value);
                else ++fails;
            }
        out.ok = out.ok && fails == 0;
        double med = median(vals), l = log2n(n);
        std::string ratio = prev_n && 2 * prev_n == n && prev > 0 ? fmt_double(med / prev) : "";
        sum << n << ',' << runs_n << ',' << fails << ',' << fmt_double(med) << ',' << ratio << ',' << fmt_double(med / l)
            << ',' << fmt_double(med / (l * l)) << ',' << fmt_double(med / n) << '\n';
        prev = med;
        prev_n = n;
    }
    out.runs_csv = runs.str();
    out.summary_csv = sum.str();
    return out;
}

}  // namespace mstsim
