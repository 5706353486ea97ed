#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mstsim/graph.hpp"

namespace mstsim {

enum class TraceLevel { Off, Milestones, Full };

// Reads MSTSIM_TRACE (full|milestones|off); defaults to milestones.
TraceLevel trace_level_from_env();

struct TraceEvent {
    std::uint64_t t = 0;
    NodeId node = 0;
    std::string kind;
    std::string detail;
};

class Trace {
public:
    TraceLevel level = TraceLevel::Milestones;
    std::vector<TraceEvent> events;

    bool on() const { return level != TraceLevel::Off; }
    bool full() const { return level == TraceLevel::Full; }
    // Alarms are always kept; other kinds only when tracing is on.
    void add(std::uint64_t t, NodeId node, std::string kind, std::string detail);
    std::string to_text() const;
    std::uint64_t hash() const;
    std::vector<const TraceEvent*> of_kind(const std::string& kind) const;
};

std::string format_event(const TraceEvent& e);

}  // namespace mstsim
