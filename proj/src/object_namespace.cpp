#include "svcvirt/object_namespace.hpp"

#include "svcvirt/error.hpp"
#include "svcvirt/workspace.hpp"

#include <sstream>

namespace svcvirt {

std::string_view to_string(ObjectKind kind) noexcept
{
    switch (kind) {
    case ObjectKind::Port: return "Port";
    case ObjectKind::NamedPipe: return "NamedPipe";
    case ObjectKind::Mutex: return "Mutex";
    case ObjectKind::Section: return "Section";
    case ObjectKind::Event: return "Event";
    case ObjectKind::File: return "File";
    }
    return "?";
}

ObjectKind parse_object_kind(std::string_view text)
{
    for (const auto kind : kAllObjectKinds) {
        if (iequals(text, to_string(kind)))
            return kind;
    }
    throw Error(ErrorCode::ParseError, "unknown object kind '" + std::string(text) + "'");
}

ObjectName ObjectName::parse(std::string_view text)
{
    const bool nt_path = text.size() >= 2 && text.front() == '\\';
    if ((!nt_path && !svcvirt::is_drive_path(text)) || text.back() == '\\')
        throw Error(ErrorCode::MalformedName, "malformed object name '" + std::string(text) + "'");
    return ObjectName(std::string(text));
}

bool ObjectName::is_drive_path() const
{
    return svcvirt::is_drive_path(text_);
}

ObjectNamespace::ObjectNamespace(const VmTable& vms, ExemptionList exemptions)
    : vms_(vms), exemptions_(std::move(exemptions))
{
}

ObjectName ObjectNamespace::rename_for_vm(const ObjectName& name, VmId vm) const
{
    if (!vms_.is_live(vm))
        throw Error(ErrorCode::UnknownVm, "unknown VM " + std::to_string(vm.value));
    if (is_exempt(name))
        return name;
    return ObjectName::parse(name.str() + "-vm" + std::to_string(vm.value));
}

ObjectName ObjectNamespace::effective_name(ObjectKind kind, const ObjectName& name, const Placement& where) const
{
    if (where.is_host() || is_exempt(name))
        return name;
    if (kind == ObjectKind::File && name.is_drive_path()) {
        if (!vms_.is_live(*where.vm()))
            throw Error(ErrorCode::UnknownVm, "unknown VM " + where.str());
        return ObjectName::parse(remap_file_path(name.str(), *where.vm()));
    }
    return rename_for_vm(name, *where.vm());
}

ObjectHandle ObjectNamespace::bind(std::uint64_t serial)
{
    const ObjectHandle h{next_handle_++};
    handles_[h.id] = serial;
    return h;
}

ObjectHandle ObjectNamespace::create_object(Pid creator, const Placement& where, ObjectKind kind, const ObjectName& name)
{
    return create_effective(creator, where, kind, effective_name(kind, name, where));
}

ObjectHandle ObjectNamespace::open_object(const Placement& where, ObjectKind kind, const ObjectName& name)
{
    return open_effective(kind, effective_name(kind, name, where));
}

ObjectHandle ObjectNamespace::create_effective(Pid creator, const Placement& where, ObjectKind kind,
                                               const ObjectName& effective)
{
    if (objects_.contains(effective.str()))
        throw Error(ErrorCode::AlreadyExists, "object already exists: " + effective.str());
    const auto serial = next_serial_++;
    objects_.emplace(effective.str(), LiveObject{serial, ObjectEntry{kind, effective.str(), creator, where}});
    return bind(serial);
}

ObjectHandle ObjectNamespace::open_effective(ObjectKind kind, const ObjectName& effective)
{
    const auto it = objects_.find(effective.str());
    if (it == objects_.end())
        throw Error(ErrorCode::NotFound, "object not found: " + effective.str());
    if (it->second.entry.kind != kind) {
        throw Error(ErrorCode::KindMismatch, "object " + effective.str() + " is a " +
                                                 std::string(to_string(it->second.entry.kind)) + ", not a " +
                                                 std::string(to_string(kind)));
    }
    return bind(it->second.serial);
}

void ObjectNamespace::delete_object(ObjectHandle handle)
{
    const auto h = handles_.find(handle.id);
    if (h == handles_.end())
        throw Error(ErrorCode::StaleHandle, "stale object handle " + std::to_string(handle.id));
    const auto serial = h->second;
    handles_.erase(h);
    for (auto it = objects_.begin(); it != objects_.end(); ++it) {
        if (it->second.serial == serial) {
            objects_.erase(it);
            std::erase_if(handles_, [&](const auto& kv) { return kv.second == serial; });
            return;
        }
    }
    throw Error(ErrorCode::StaleHandle, "stale object handle " + std::to_string(handle.id));
}

std::size_t ObjectNamespace::delete_created_by(Pid creator)
{
    std::size_t removed = 0;
    for (auto it = objects_.begin(); it != objects_.end();) {
        if (it->second.entry.creator == creator) {
            const auto serial = it->second.serial;
            std::erase_if(handles_, [&](const auto& kv) { return kv.second == serial; });
            it = objects_.erase(it);
            ++removed;
        } else {
            ++it;
        }
    }
    return removed;
}

const ObjectEntry* ObjectNamespace::find(std::string_view effective) const
{
    const auto it = objects_.find(effective);
    return it == objects_.end() ? nullptr : &it->second.entry;
}

std::string ObjectNamespace::name_of(ObjectHandle handle) const
{
    const auto h = handles_.find(handle.id);
    if (h != handles_.end()) {
        for (const auto& [name, obj] : objects_) {
            if (obj.serial == h->second)
                return obj.entry.name;
        }
    }
    throw Error(ErrorCode::StaleHandle, "stale object handle " + std::to_string(handle.id));
}

std::vector<ObjectEntry> ObjectNamespace::entries() const
{
    std::vector<ObjectEntry> out;
    for (const auto& [_, obj] : objects_)
        out.push_back(obj.entry);
    return out;
}

std::string ObjectNamespace::dump() const
{
    std::ostringstream os;
    for (const auto& [_, obj] : objects_) {
        os << to_string(obj.entry.kind) << ' ' << obj.entry.name << " creator=" << obj.entry.creator.value
           << " vm=" << obj.entry.placement.str() << '\n';
    }
    return os.str();
}

} // namespace svcvirt
