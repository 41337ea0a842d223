#pragma once

#include "svcvirt/exemptions.hpp"
#include "svcvirt/text.hpp"
#include "svcvirt/types.hpp"
#include "svcvirt/vm_table.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace svcvirt {

enum class ObjectKind { Port, NamedPipe, Mutex, Section, Event, File };

inline constexpr std::array<ObjectKind, 6> kAllObjectKinds = {
    ObjectKind::Port, ObjectKind::NamedPipe, ObjectKind::Mutex,
    ObjectKind::Section, ObjectKind::Event, ObjectKind::File,
};

std::string_view to_string(ObjectKind kind) noexcept;
ObjectKind parse_object_kind(std::string_view text);

// Absolute object path (`\BaseNamedObjects\Foo`). File objects may instead
// use a drive path (`c:\data\a.mdb`); those are remapped into the VM
// workspace rather than suffixed.
class ObjectName {
public:
    static ObjectName parse(std::string_view text);

    const std::string& str() const { return text_; }
    bool is_drive_path() const;

    bool operator==(const ObjectName& other) const { return iequals(text_, other.text_); }

private:
    explicit ObjectName(std::string text) : text_(std::move(text)) {}

    std::string text_;
};

struct ObjectHandle {
    std::uint64_t id = 0;
    auto operator<=>(const ObjectHandle&) const = default;
};

struct ObjectEntry {
    ObjectKind kind;
    std::string name;  // effective name
    Pid creator;
    Placement placement;
};

class ObjectNamespace {
public:
    ObjectNamespace(const VmTable& vms, ExemptionList exemptions);

    const ExemptionList& exemptions() const { return exemptions_; }
    void set_exemptions(ExemptionList exemptions) { exemptions_ = std::move(exemptions); }

    bool is_exempt(const ObjectName& name) const { return exemptions_.matches(name.str()); }

    // Appends `-vm<id>` to the final segment unless the name is exempt.
    ObjectName rename_for_vm(const ObjectName& name, VmId vm) const;

    // The name a request from `where` actually touches: host requests and
    // exempt names are untouched, drive paths are remapped into the VM
    // workspace, everything else goes through rename_for_vm.
    ObjectName effective_name(ObjectKind kind, const ObjectName& name, const Placement& where) const;

    ObjectHandle create_object(Pid creator, const Placement& where, ObjectKind kind, const ObjectName& name);
    ObjectHandle open_object(const Placement& where, ObjectKind kind, const ObjectName& name);

    // Same as above with the name already transformed by the monitor.
    ObjectHandle create_effective(Pid creator, const Placement& where, ObjectKind kind, const ObjectName& effective);
    ObjectHandle open_effective(ObjectKind kind, const ObjectName& effective);

    void delete_object(ObjectHandle handle);
    // Objects die with the process that created them; returns the count removed.
    std::size_t delete_created_by(Pid creator);

    const ObjectEntry* find(std::string_view effective) const;
    std::string name_of(ObjectHandle handle) const;
    std::vector<ObjectEntry> entries() const;

    // `<kind> <effective-name> creator=<pid> vm=<vm|host>` sorted by name.
    std::string dump() const;

private:
    struct LiveObject {
        std::uint64_t serial;
        ObjectEntry entry;
    };

    ObjectHandle bind(std::uint64_t serial);

    const VmTable& vms_;
    ExemptionList exemptions_;
    std::map<std::string, LiveObject, CaseInsensitiveLess> objects_;
    std::map<std::uint64_t, std::uint64_t> handles_;  // handle -> object serial
    std::uint64_t next_serial_ = 1;
    std::uint64_t next_handle_ = 1;
};

} // namespace svcvirt
