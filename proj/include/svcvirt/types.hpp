#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace svcvirt {

struct VmId {
    std::uint32_t value = 0;
    auto operator<=>(const VmId&) const = default;
};

struct Pid {
    std::uint32_t value = 0;
    auto operator<=>(const Pid&) const = default;
};

// Where a process runs: the host, or exactly one VM. The host is never
// represented by a numeric VM id.
class Placement {
public:
    static Placement host() { return Placement{}; }
    static Placement in_vm(VmId vm) { return Placement{vm}; }

    bool is_host() const { return !vm_.has_value(); }
    const std::optional<VmId>& vm() const { return vm_; }

    // "host" or the decimal VM id.
    std::string str() const { return vm_ ? std::to_string(vm_->value) : "host"; }

    bool operator==(const Placement&) const = default;

private:
    Placement() = default;
    explicit Placement(VmId vm) : vm_(vm) {}

    std::optional<VmId> vm_;
};

} // namespace svcvirt
