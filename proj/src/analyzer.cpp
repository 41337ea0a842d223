#include "svcvirt/analyzer.hpp"

#include "svcvirt/text.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace svcvirt {

namespace {

bool is_object_access(std::string_view op)
{
    return op.starts_with("create-object") || op.starts_with("open-object") || op == "connect-pipe" ||
           op == "delete-object";
}

using Key = std::pair<std::string, std::string>;  // (op, lowercased original name)

Key key_of(const TraceEvent& e)
{
    return {e.op, to_lower(e.arg)};
}

// Service processes are the ones that talk to SCM over a control pipe; the
// rest (SCM itself, other core processes) are the host side of the story.
std::set<std::uint32_t> service_pids(const std::vector<TraceEvent>& trace)
{
    std::set<std::uint32_t> pids;
    for (const auto& e : trace) {
        if (e.op == "connect-pipe")
            pids.insert(e.pid.value);
    }
    return pids;
}

std::pair<std::string, std::string> split_number(std::string_view name)
{
    auto cut = name.size();
    while (cut > 0 && name[cut - 1] >= '0' && name[cut - 1] <= '9')
        --cut;
    return {std::string(name.substr(0, cut)), std::string(name.substr(cut))};
}

} // namespace

std::string_view to_string(Confidence c) noexcept
{
    return c == Confidence::MatchedFailure ? "matched-failure" : "matched-divergence";
}

std::vector<ExemptionProposal> diff_traces(const std::vector<TraceEvent>& host_trace,
                                           const std::vector<TraceEvent>& vm_trace)
{
    const auto services = service_pids(host_trace);

    std::map<Key, std::vector<const TraceEvent*>> host_side;
    std::set<std::string, CaseInsensitiveLess> core_created;
    for (const auto& e : host_trace) {
        if (!is_object_access(e.op))
            continue;
        if (services.contains(e.pid.value)) {
            host_side[key_of(e)].push_back(&e);
        } else if (e.op.starts_with("create-object") && e.ok()) {
            core_created.insert(e.arg);
        }
    }

    std::map<Key, std::size_t> seen;
    std::map<std::string, ExemptionProposal, CaseInsensitiveLess> out;
    for (const auto& e : vm_trace) {
        if (e.vm.is_host() || !is_object_access(e.op))
            continue;
        const auto key = key_of(e);
        const auto k = seen[key]++;
        const auto h = host_side.find(key);
        if (h == host_side.end() || k >= h->second.size())
            continue;
        const auto& host_event = *h->second[k];
        if (!host_event.ok() || e.xarg == e.arg || out.contains(e.arg))
            continue;
        if (!e.ok())
            out.emplace(e.arg, ExemptionProposal{e.arg, host_event, e, Confidence::MatchedFailure});
        else if (core_created.contains(e.arg))
            out.emplace(e.arg, ExemptionProposal{e.arg, host_event, e, Confidence::MatchedDivergence});
    }

    std::vector<ExemptionProposal> result;
    for (auto& [_, p] : out)
        result.push_back(std::move(p));
    return result;
}

std::vector<ExemptionPattern> apply_proposals(const std::vector<ExemptionProposal>& proposals)
{
    std::set<std::string, CaseInsensitiveLess> names;
    for (const auto& p : proposals)
        names.insert(p.name);

    std::map<std::string, std::set<std::string, CaseInsensitiveLess>, CaseInsensitiveLess> numbered;
    for (const auto& n : names) {
        auto [prefix, digits] = split_number(n);
        if (!digits.empty() && !prefix.empty())
            numbered[prefix].insert(n);
    }

    std::vector<ExemptionPattern> out;
    std::set<std::string, CaseInsensitiveLess> emitted;
    for (const auto& n : names) {
        const auto [prefix, digits] = split_number(n);
        const auto group = numbered.find(prefix);
        if (!digits.empty() && group != numbered.end() && group->second.size() >= 2) {
            if (emitted.insert(prefix + "*").second)
                out.push_back(ExemptionPattern::numeric_wildcard(prefix));
        } else if (emitted.insert(n).second) {
            out.push_back(ExemptionPattern::literal(n));
        }
    }
    return out;
}

std::string format_proposals(const std::vector<ExemptionProposal>& proposals)
{
    std::string out;
    for (const auto& p : proposals) {
        out += p.name + " confidence=" + std::string(to_string(p.confidence)) +
               " host=" + std::to_string(p.host_event.step) + ":" + p.host_event.result +
               " vm=" + std::to_string(p.vm_event.step) + ":" + p.vm_event.xarg + ":" + p.vm_event.result + "\n";
    }
    return out;
}

} // namespace svcvirt
