#include "svcvirt/vm_table.hpp"

#include "svcvirt/error.hpp"

namespace svcvirt {

VmId VmTable::create()
{
    const VmId vm{next_++};
    live_.insert(vm);
    return vm;
}

void VmTable::destroy(VmId vm)
{
    if (live_.erase(vm) == 0)
        throw Error(ErrorCode::UnknownVm, "unknown VM " + std::to_string(vm.value));
}

} // namespace svcvirt
