#pragma once

#include "svcvirt/exemptions.hpp"
#include "svcvirt/trace.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace svcvirt {

enum class Confidence {
    MatchedFailure,     // renamed in the VM and the call failed
    MatchedDivergence,  // renamed and succeeded, but reached a VM-local copy of a core process's object
};

std::string_view to_string(Confidence c) noexcept;

struct ExemptionProposal {
    std::string name;
    TraceEvent host_event;
    TraceEvent vm_event;
    Confidence confidence;
};

// Pairs the k-th (op, name) object access of the service processes in the
// host run with the k-th one made inside a VM, and proposes every name the
// host run reached but the renamed VM access did not.
std::vector<ExemptionProposal> diff_traces(const std::vector<TraceEvent>& host_trace,
                                           const std::vector<TraceEvent>& vm_trace);

// Literal patterns; names that differ only in a trailing number collapse to
// one `prefix*` pattern once there are two or more of them.
std::vector<ExemptionPattern> apply_proposals(const std::vector<ExemptionProposal>& proposals);

// `<name> confidence=<c> host=<step>:<result> vm=<step>:<xarg>:<result>` per line.
std::string format_proposals(const std::vector<ExemptionProposal>& proposals);

} // namespace svcvirt
