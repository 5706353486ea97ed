#include "mstsim/trace.hpp"

#include <cstdlib>
#include <sstream>

namespace mstsim {

TraceLevel trace_level_from_env() {
    const char* s = std::getenv("MSTSIM_TRACE");
    if (!s) return TraceLevel::Milestones;
    std::string v = s;
    if (v == "full") return TraceLevel::Full;
    if (v == "off") return TraceLevel::Off;
    return TraceLevel::Milestones;
}

void Trace::add(std::uint64_t t, NodeId node, std::string kind, std::string detail) {
    if (level == TraceLevel::Off && kind != "alarm" && kind != "budget-violation") return;
    events.push_back({t, node, std::move(kind), std::move(detail)});
}

std::string format_event(const TraceEvent& e) {
    std::ostringstream os;
    os << "t=" << e.t << " node=" << e.node << " event=" << e.kind << " detail=" << e.detail;
    return os.str();
}

std::string Trace::to_text() const {
    std::string out;
    for (auto& e : events) {
        out += format_event(e);
        out += '\n';
    }
    return out;
}

std::uint64_t Trace::hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ULL;
        }
    };
    for (auto& e : events) {
        mix(format_event(e));
        mix("\n");
    }
    return h;
}

std::vector<const TraceEvent*> Trace::of_kind(const std::string& kind) const {
    std::vector<const TraceEvent*> out;
    for (auto& e : events)
        if (e.kind == kind) out.push_back(&e);
    return out;
}

}  // namespace mstsim
