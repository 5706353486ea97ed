#include "mstsim/sim.hpp"

#include <sstream>

namespace mstsim {

std::vector<FaultEvent> parse_faults(const std::string& text) {
    std::vector<FaultEvent> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw)) continue;
        auto bad = [&](const std::string& why) {
            return Error("parse", "faults line " + std::to_string(lineno) + ": " + why);
        };
        if (kw != "fault") throw bad("expected 'fault'");
        FaultEvent f;
        std::string kind;
        if (!(ls >> f.time >> f.node >> kind)) throw bad("expected <time> <node> <kind>");
        if (kind == "randomize") {
            f.kind = FaultKind::Randomize;
        } else if (kind == "set") {
            f.kind = FaultKind::Set;
            if (!(ls >> f.reg >> f.value)) throw bad("set needs <reg> <value>");
        } else if (kind == "flip") {
            f.kind = FaultKind::Flip;
            if (!(ls >> f.count) || f.count < 1) throw bad("flip needs a positive count");
        } else {
            throw bad("unknown fault kind " + kind);
        }
        out.push_back(f);
    }
    return out;
}

std::string serialize_faults(const std::vector<FaultEvent>& fs) {
    std::ostringstream o;
    for (auto& f : fs) {
        o << "fault " << f.time << ' ' << f.node << ' ';
        switch (f.kind) {
            case FaultKind::Randomize: o << "randomize"; break;
            case FaultKind::Set: o << "set " << f.reg << ' ' << f.value; break;
            case FaultKind::Flip: o << "flip " << f.count; break;
        }
        o << '\n';
    }
    return o.str();
}

}  // namespace mstsim
