#pragma once

#include "svcvirt/text.hpp"
#include "svcvirt/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace svcvirt {

// The two API families that take a service name straight from the binary:
// service management calls (OpenService, handler registration) and string
// initialisation of a service name.
enum class ApiClass { ServiceApi, StringApi };

std::string_view to_string(ApiClass c) noexcept;

// Per VM: original service name -> name of its clone in that VM.
class NameRewriteTable {
public:
    void add(VmId vm, std::string_view original, std::string_view virtualized);
    std::optional<std::string> lookup(VmId vm, std::string_view original) const;
    std::vector<std::pair<std::string, std::string>> entries(VmId vm) const;

    // Host calls, already-virtualized names and names not cloned into the
    // caller's VM come back unchanged. A hit keeps the argument's own casing
    // and appends the VM suffix.
    std::string rewrite(const Placement& caller, ApiClass api, std::string_view arg) const;

private:
    std::map<VmId, std::map<std::string, std::string, CaseInsensitiveLess>> table_;
};

} // namespace svcvirt
