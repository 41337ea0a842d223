#pragma once

#include "svcvirt/types.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace svcvirt {

// VM id carried by a trailing `-vm<digits>` (no leading zero), if any.
// Only the last occurrence counts, so `web-vmhost-vm2` belongs to VM 2.
std::optional<VmId> vm_suffix(std::string_view name) noexcept;

inline bool is_virtualized(std::string_view name) noexcept
{
    return vm_suffix(name).has_value();
}

// The name with its `-vm<id>` suffix removed; the name itself if it has none.
std::string base_name(std::string_view name);

// `<base>-vm<id>`
std::string virtualized_name(std::string_view base, VmId vm);

} // namespace svcvirt
