#pragma once

#include "svcvirt/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace svcvirt {

// One intercepted operation. For host processes `arg == xarg` always.
struct TraceEvent {
    std::uint64_t step = 0;
    Pid pid;
    Placement vm = Placement::host();
    std::string op;
    std::string arg;
    std::string xarg;
    std::string result = "ok";

    bool ok() const { return result == "ok"; }
    bool operator==(const TraceEvent&) const = default;
};

// step=<n> pid=<p> vm=<v|host> op=<name> arg=<original> xarg=<transformed> result=<ok|error-code>
std::string format_trace_event(const TraceEvent& event);
TraceEvent parse_trace_line(std::string_view line, std::size_t line_no);
std::vector<TraceEvent> parse_trace(std::string_view text);
std::vector<TraceEvent> load_trace(const std::string& path);

class Trace {
public:
    // Step number stamped on events appended from now on.
    void set_step(std::uint64_t step) { step_ = step; }
    std::uint64_t step() const { return step_; }

    const TraceEvent& append(Pid pid, const Placement& vm, std::string op, std::string arg, std::string xarg,
                             std::string result = "ok");
    // Places an event before ones already appended, so a call shows up ahead
    // of the status changes it caused.
    void insert(std::size_t index, Pid pid, const Placement& vm, std::string op, std::string arg, std::string xarg,
                std::string result);

    const std::vector<TraceEvent>& events() const { return events_; }
    std::size_t size() const { return events_.size(); }
    std::string str() const;

private:
    std::uint64_t step_ = 0;
    std::vector<TraceEvent> events_;
};

} // namespace svcvirt
