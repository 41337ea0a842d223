#pragma once

#include "svcvirt/object_namespace.hpp"
#include "svcvirt/rewrite_table.hpp"
#include "svcvirt/types.hpp"
#include "svcvirt/vm_table.hpp"

#include <span>
#include <string>
#include <string_view>

namespace svcvirt {

enum class SyscallOp {
    CreateObject,
    OpenObject,
    DeleteObject,
    ConnectPipe,
    OpenService,
    RegisterHandler,
    StringApi,
    WaitService,
};

struct SyscallRequest {
    SyscallOp op;
    ObjectKind kind = ObjectKind::Port;  // object operations only
    std::string arg;

    bool operator==(const SyscallRequest&) const = default;
};

bool is_object_op(SyscallOp op) noexcept;
// Trace op tag: `create-object:Port`, `connect-pipe`, `open-service`, ...
std::string op_tag(const SyscallRequest& request);

// A `-vm<id>` tagged parameter (svchost `-k group-vm3`) or a workspace image
// path puts the process in that VM; otherwise it runs in the host.
Placement classify_process(const VmTable& vms, std::string_view image_path, std::span<const std::string> params);

class Monitor {
public:
    Monitor(const ObjectNamespace& objects, const NameRewriteTable& rewrites) : objects_(objects), rewrites_(rewrites) {}

    void set_name_rewrite(bool on) { name_rewrite_ = on; }
    bool name_rewrite() const { return name_rewrite_; }

    // Returns the request the kernel actually executes. Never throws:
    // a name that does not parse is passed on as is and fails downstream.
    SyscallRequest intercept(const Placement& caller, const SyscallRequest& request) const;

private:
    const ObjectNamespace& objects_;
    const NameRewriteTable& rewrites_;
    bool name_rewrite_ = true;
};

} // namespace svcvirt
