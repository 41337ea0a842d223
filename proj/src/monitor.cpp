#include "svcvirt/monitor.hpp"

#include "svcvirt/error.hpp"
#include "svcvirt/service_name.hpp"
#include "svcvirt/workspace.hpp"

namespace svcvirt {

bool is_object_op(SyscallOp op) noexcept
{
    return op == SyscallOp::CreateObject || op == SyscallOp::OpenObject || op == SyscallOp::DeleteObject ||
           op == SyscallOp::ConnectPipe;
}

std::string op_tag(const SyscallRequest& request)
{
    switch (request.op) {
    case SyscallOp::CreateObject: return "create-object:" + std::string(to_string(request.kind));
    case SyscallOp::OpenObject: return "open-object:" + std::string(to_string(request.kind));
    case SyscallOp::DeleteObject: return "delete-object";
    case SyscallOp::ConnectPipe: return "connect-pipe";
    case SyscallOp::OpenService: return "open-service";
    case SyscallOp::RegisterHandler: return "register-handler";
    case SyscallOp::StringApi: return "string-api";
    case SyscallOp::WaitService: return "wait-service";
    }
    return "?";
}

Placement classify_process(const VmTable& vms, std::string_view image_path, std::span<const std::string> params)
{
    std::optional<VmId> from_param;
    for (const auto& p : params) {
        if (const auto vm = vm_suffix(p))
            from_param = vm;
    }
    const auto from_path = workspace_vm(image_path);
    if (from_param && from_path && *from_param != *from_path) {
        throw Error(ErrorCode::ClassificationConflict, "parameters name VM " + std::to_string(from_param->value) +
                                                           " but " + std::string(image_path) + " lies in VM " +
                                                           std::to_string(from_path->value));
    }
    const auto vm = from_param ? from_param : from_path;
    if (!vm)
        return Placement::host();
    if (!vms.is_live(*vm))
        throw Error(ErrorCode::UnknownVm, "unknown VM " + std::to_string(vm->value));
    return Placement::in_vm(*vm);
}

SyscallRequest Monitor::intercept(const Placement& caller, const SyscallRequest& request) const
{
    if (caller.is_host())
        return request;
    SyscallRequest out = request;
    switch (request.op) {
    case SyscallOp::CreateObject:
    case SyscallOp::OpenObject:
    case SyscallOp::DeleteObject:
    case SyscallOp::ConnectPipe:
        try {
            const auto kind = request.op == SyscallOp::ConnectPipe ? ObjectKind::NamedPipe : request.kind;
            out.arg = objects_.effective_name(kind, ObjectName::parse(request.arg), caller).str();
        } catch (const Error&) {
        }
        break;
    case SyscallOp::OpenService:
    case SyscallOp::RegisterHandler:
    case SyscallOp::WaitService:
        if (name_rewrite_)
            out.arg = rewrites_.rewrite(caller, ApiClass::ServiceApi, request.arg);
        break;
    case SyscallOp::StringApi:
        if (name_rewrite_)
            out.arg = rewrites_.rewrite(caller, ApiClass::StringApi, request.arg);
        break;
    }
    return out;
}

} // namespace svcvirt
