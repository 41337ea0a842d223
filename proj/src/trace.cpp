#include "svcvirt/trace.hpp"

#include "svcvirt/error.hpp"
#include "svcvirt/text.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace svcvirt {

namespace {

[[noreturn]] void bad_line(std::size_t line_no, const std::string& why)
{
    throw Error(ErrorCode::ParseError, "trace line " + std::to_string(line_no) + ": " + why);
}

template <typename Int>
Int parse_number(std::string_view text, std::size_t line_no, const char* field)
{
    Int value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
        bad_line(line_no, std::string("bad ") + field + " '" + std::string(text) + "'");
    return value;
}

// Consumes `<key>=<token>` where the token ends at the next space.
std::string_view take_token(std::string_view& rest, std::string_view key, std::size_t line_no)
{
    if (!rest.starts_with(key))
        bad_line(line_no, "expected '" + std::string(key) + "'");
    rest.remove_prefix(key.size());
    const auto end = rest.find(' ');
    if (end == std::string_view::npos)
        bad_line(line_no, "truncated after '" + std::string(key) + "'");
    const auto token = rest.substr(0, end);
    rest.remove_prefix(end + 1);
    return token;
}

} // namespace

std::string format_trace_event(const TraceEvent& e)
{
    std::string out = "step=" + std::to_string(e.step) + " pid=" + std::to_string(e.pid.value) + " vm=" + e.vm.str();
    out += " op=" + e.op + " arg=" + e.arg + " xarg=" + e.xarg + " result=" + e.result;
    return out;
}

TraceEvent parse_trace_line(std::string_view line, std::size_t line_no)
{
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    TraceEvent e;
    std::string_view rest = line;
    e.step = parse_number<std::uint64_t>(take_token(rest, "step=", line_no), line_no, "step");
    e.pid = Pid{parse_number<std::uint32_t>(take_token(rest, "pid=", line_no), line_no, "pid")};
    const auto vm = take_token(rest, "vm=", line_no);
    e.vm = vm == "host" ? Placement::host() : Placement::in_vm(VmId{parse_number<std::uint32_t>(vm, line_no, "vm")});
    if (!e.vm.is_host() && e.vm.vm()->value == 0)
        bad_line(line_no, "vm id 0 is not valid");
    e.op = std::string(take_token(rest, "op=", line_no));

    // Arguments may contain spaces; split on the last field markers.
    const auto result_at = rest.rfind(" result=");
    if (result_at == std::string_view::npos)
        bad_line(line_no, "missing 'result='");
    e.result = std::string(rest.substr(result_at + 8));
    if (e.result.empty() || e.result.find(' ') != std::string::npos)
        bad_line(line_no, "bad result field");
    rest = rest.substr(0, result_at);
    const auto xarg_at = rest.rfind(" xarg=");
    if (xarg_at == std::string_view::npos)
        bad_line(line_no, "missing 'xarg='");
    e.xarg = std::string(rest.substr(xarg_at + 6));
    rest = rest.substr(0, xarg_at);
    if (!rest.starts_with("arg="))
        bad_line(line_no, "missing 'arg='");
    e.arg = std::string(rest.substr(4));
    return e;
}

std::vector<TraceEvent> parse_trace(std::string_view text)
{
    std::vector<TraceEvent> out;
    std::size_t line_no = 0;
    auto lines = split(text, '\n');
    if (!lines.empty() && lines.back().empty())
        lines.pop_back();
    for (const auto& line : lines)
        out.push_back(parse_trace_line(line, ++line_no));
    return out;
}

std::vector<TraceEvent> load_trace(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::ParseError, "cannot read trace '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_trace(ss.str());
}

const TraceEvent& Trace::append(Pid pid, const Placement& vm, std::string op, std::string arg, std::string xarg,
                                std::string result)
{
    events_.push_back(TraceEvent{step_, pid, vm, std::move(op), std::move(arg), std::move(xarg), std::move(result)});
    return events_.back();
}

void Trace::insert(std::size_t index, Pid pid, const Placement& vm, std::string op, std::string arg, std::string xarg,
                   std::string result)
{
    index = std::min(index, events_.size());
    events_.insert(events_.begin() + static_cast<std::ptrdiff_t>(index),
                   TraceEvent{step_, pid, vm, std::move(op), std::move(arg), std::move(xarg), std::move(result)});
}

std::string Trace::str() const
{
    std::string out;
    for (const auto& e : events_)
        out += format_trace_event(e) + "\n";
    return out;
}

} // namespace svcvirt
