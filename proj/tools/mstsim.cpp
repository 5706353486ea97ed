#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mstsim/scenario.hpp"

using namespace mstsim;

namespace {

struct ParseFail : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// "1-5" or "1,2,3"; empty gives an empty list.
template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& what) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            auto dash = item.find('-', 1);
            if (dash != std::string::npos) {
                T a = static_cast<T>(std::stoll(item.substr(0, dash))), b = static_cast<T>(std::stoll(item.substr(dash + 1)));
                for (T x = a; x <= b; ++x) out.push_back(x);
            } else {
                out.push_back(static_cast<T>(std::stoll(item)));
            }
        } catch (const std::logic_error&) {
            throw ParseFail(what + ": bad item '" + item + "'");
        }
    }
    return out;
}

void write_out(const std::string& dir, const std::string& name, const std::string& text) {
    if (dir.empty() || text.empty()) return;
    std::filesystem::create_directories(dir);
    write_file((std::filesystem::path(dir) / name).string(), text);
}

std::string metrics_csv(const nlohmann::json& m) {
    std::ostringstream os;
    os << "key,value\n";
    for (auto& [k, v] : m.items())
        if (v.is_primitive()) os << k << ',' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mstsim: MST construction, proof labels and self-stabilizing verification on a simulated network"};
    app.require_subcommand(1);

    Scenario sc;
    std::string mode = "construct", sched = "sync", out_dir, scenario_file, save_scenario;
    auto add_common = [&](CLI::App* c) {
        c->add_option("--mode", mode, "construct | verify-only | selfstab | trains-bench");
        c->add_option("--scheduler", sched, "sync | async")->check(CLI::IsMember({"sync", "async"}));
        c->add_option("--fairness", sc.fairness, "async fairness window k (default 2n)");
        c->add_option("--seed", sc.seed, "scheduler and fault seed");
        c->add_option("--faults", sc.faults, "fault file");
        c->add_option("--horizon", sc.horizon, "ideal time units (0: mode default)");
        c->add_option("--out", out_dir, "output directory");
        c->add_option("--budget-bits", sc.budget_bits, "per-node register budget in bits (0: none)");
        c->add_flag("--randomize", sc.randomize, "selfstab: random initial registers");
        c->add_option("--post-faults", sc.post_faults, "selfstab: faults injected after each convergence");
    };

    auto* run = app.add_subcommand("run", "run one scenario");
    add_common(run);
    run->add_option("--graph", sc.graph, "generator spec (random:n=64:seed=7) or graph file");
    run->add_option("--labels", sc.labels, "label file (verify-only)");
    run->add_option("--scenario", scenario_file, "scenario JSON file; flags given later are ignored");
    run->add_option("--save-scenario", save_scenario, "write the effective scenario as JSON");

    CampaignSpec cs;
    std::string sizes, seeds = "1-5";
    auto* camp = app.add_subcommand("campaign", "sweep sizes x seeds and aggregate");
    add_common(camp);
    camp->add_option("--graph-kind", cs.graph_kind, "random | path | star | grid | complete");
    camp->add_option("--n", sizes, "sizes, e.g. 32,64,128")->required();
    camp->add_option("--seeds", seeds, "seeds, e.g. 1-5 or 1,3,9");
    camp->add_option("--metric", cs.metric, "rounds | bits | delivery | compare | convergence");
    camp->add_option("--corruption", cs.corruption, "verify-only: corruption kind");
    camp->add_option("--threads", cs.threads, "worker threads (0: all cores)");

    std::string g_file, l_file, t_file;
    auto* chk = app.add_subcommand("check-labels", "run the structural label checks centrally");
    chk->add_option("--graph", g_file, "graph file or generator spec")->required();
    chk->add_option("--labels", l_file, "label file")->required();
    chk->add_option("--tree", t_file, "component file (default: parent ids in the labels)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const TraceLevel lvl = trace_level_from_env();
    try {
        if (*chk) {
            auto g = graph_from_spec(g_file);
            auto b = parse_labels(g, read_file(l_file));
            ComponentMap tree;
            if (!t_file.empty()) {
                tree = parse_components(g, read_file(t_file));
            } else {
                tree.parent_port.assign(g.n(), 0);
                for (int v = 0; v < g.n(); ++v) {
                    if (!b[v].pid) continue;
                    int u = g.index_of(b[v].pid);
                    tree.parent_port[v] = u < 0 ? 0 : g.port_to(v, u);
                }
            }
            auto viol = check_labels(g, tree, b);
            for (auto& x : viol) std::cout << "node=" << x.node << " check=" << x.check << ' ' << x.detail << '\n';
            std::cout << viol.size() << " violations\n";
            return viol.empty() ? 0 : 1;
        }

        if (!scenario_file.empty()) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(read_file(scenario_file));
            } catch (const nlohmann::json::parse_error& e) {
                throw ParseFail(scenario_file + ": " + e.what());
            }
            sc = scenario_from_json(j);
        } else {
            sc.mode = parse_mode(mode);
            sc.sched = sched == "async" ? SchedMode::Async : SchedMode::Sync;
        }

        if (*camp) {
            cs.base = sc;
            cs.sizes = parse_list<int>(sizes, "--n");
            cs.seeds = parse_list<std::uint64_t>(seeds, "--seeds");
            if (cs.sizes.empty() || cs.seeds.empty()) throw ParseFail("empty sweep");
            if (cs.metric.empty()) {
                switch (sc.mode) {
                    case Mode::Construct: cs.metric = "rounds"; break;
                    case Mode::VerifyOnly: cs.metric = "detection"; break;
                    case Mode::Selfstab: cs.metric = "convergence"; break;
                    case Mode::TrainsBench: cs.metric = "delivery"; break;
                }
            }
            auto r = run_campaign(cs);
            std::cout << r.summary_csv;
            write_out(out_dir, "runs.csv", r.runs_csv);
            write_out(out_dir, "summary.csv", r.summary_csv);
            return r.ok ? 0 : 1;
        }

        if (sc.graph.empty()) throw ParseFail("run needs --graph or --scenario");
        if (!save_scenario.empty()) write_file(save_scenario, to_json(sc).dump(2) + "\n");
        auto r = run_scenario(sc, lvl);
        for (auto& a : r.alarms) std::cout << a << '\n';
        std::cout << r.metrics.dump() << '\n';
        write_out(out_dir, "metrics.json", r.metrics.dump(2) + "\n");
        write_out(out_dir, "metrics.csv", metrics_csv(r.metrics));
        if (sc.mode == Mode::Selfstab) write_out(out_dir, "verdict.json", r.metrics.dump(2) + "\n");
        std::string alarms;
        for (auto& a : r.alarms) alarms += a + "\n";
        write_out(out_dir, "alarms.txt", alarms);
        write_out(out_dir, "graph.txt", r.graph);
        write_out(out_dir, "tree.txt", r.tree);
        write_out(out_dir, "labels.txt", r.labels);
        if (lvl != TraceLevel::Off) write_out(out_dir, "trace.txt", r.trace.to_text());
        return r.pass ? 0 : 1;
    } catch (const ParseFail& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error[" << e.code << "]: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
