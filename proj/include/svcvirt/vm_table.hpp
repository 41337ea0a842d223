#pragma once

#include "svcvirt/types.hpp"

#include <set>
#include <vector>

namespace svcvirt {

// Ids start at 1 and are never reused within a run.
class VmTable {
public:
    VmId create();
    void destroy(VmId vm);
    bool is_live(VmId vm) const { return live_.contains(vm); }
    std::vector<VmId> live() const { return {live_.begin(), live_.end()}; }

private:
    std::uint32_t next_ = 1;
    std::set<VmId> live_;
};

} // namespace svcvirt
