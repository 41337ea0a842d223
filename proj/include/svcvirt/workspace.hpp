#pragma once

#include "svcvirt/types.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace svcvirt {

// `c:\fvms\VM-<id>\`
std::string workspace_prefix(VmId vm);

// VM id encoded by a workspace-prefixed path, if any.
std::optional<VmId> workspace_vm(std::string_view path);

// `X:\...` (drive letter, colon, backslash).
bool is_drive_path(std::string_view path) noexcept;

// `<drive>:\rest` -> `c:\fvms\VM-<id>\<DRIVE>\rest`. Paths already inside the
// same VM's workspace are returned unchanged.
std::string remap_file_path(std::string_view path, VmId vm);

} // namespace svcvirt
