#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "mstsim/harness.hpp"

namespace mstsim {

enum class Mode { Construct, VerifyOnly, Selfstab, TrainsBench };
std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

struct Scenario {
    std::string graph;   // generator spec or graph file
    Mode mode = Mode::Construct;
    SchedMode sched = SchedMode::Sync;
    int fairness = 0;
    std::uint64_t seed = 1;
    std::string labels;  // label file (verify-only); empty: certify the graph
    std::string faults;  // fault file
    bool randomize = false;  // selfstab: random initial registers
    int post_faults = 0;     // selfstab: randomize a node after each convergence
    std::uint64_t horizon = 0;  // 0: mode default
    std::uint64_t budget_bits = 0;
    bool operator==(const Scenario&) const = default;
};

nlohmann::json to_json(const Scenario& s);
// Throws Error("parse") naming the offending key.
Scenario scenario_from_json(const nlohmann::json& j);

struct RunResult {
    bool pass = false;
    nlohmann::json metrics;  // deterministic for a fixed scenario
    std::vector<std::string> alarms;  // "alarm node=<id> t=<time> check=<code>"
    Trace trace;
    std::string graph;   // graph file of the instance
    std::string tree;    // component file of the final tree, if any
    std::string labels;  // label file produced, if any
};

RunResult run_scenario(const Scenario& s, TraceLevel lvl = TraceLevel::Off);

// Metrics row of a campaign sub-run.
struct CampaignRow {
    int n = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    double value = 0;  // the swept metric
    std::string note;
};

struct CampaignSpec {
    Scenario base;
    std::string graph_kind = "random";
    std::vector<int> sizes;
    std::vector<std::uint64_t> seeds;
    std::string metric;  // construct: rounds|bits; verify-only: detection; trains-bench: delivery|compare; selfstab: convergence
    std::string corruption = "non-minimal";  // verify-only sweeps
    int threads = 0;                          // 0: hardware concurrency
};

struct CampaignResult {
    std::vector<CampaignRow> rows;  // in (n, seed) order
    std::string runs_csv, summary_csv;
    bool ok = false;
};

// Throws Error("invalid-parameter") for an empty sweep.
CampaignResult run_campaign(const CampaignSpec& c);

}  // namespace mstsim
