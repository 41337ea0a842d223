#include "svcvirt/service_record.hpp"

#include "svcvirt/error.hpp"
#include "svcvirt/service_name.hpp"
#include "svcvirt/text.hpp"

namespace svcvirt {

namespace {

[[noreturn]] void malformed(std::string_view name, const std::string& why)
{
    throw Error(ErrorCode::MalformedServiceKey, "service key '" + std::string(name) + "': " + why);
}

template <typename T>
std::optional<T> read_as(const Registry& reg, KeyHandle key, std::string_view value, std::string_view service)
{
    const auto v = reg.get_value(key, value);
    if (!v)
        return std::nullopt;
    if (const auto* p = std::get_if<T>(&v->payload))
        return *p;
    malformed(service, "value '" + std::string(value) + "' has the wrong type");
}

} // namespace

const std::string* ServiceRecord::group() const
{
    if (const auto* dll = std::get_if<DllHosting>(&hosting))
        return &dll->group;
    return nullptr;
}

std::string ServiceRecord::image_path() const
{
    if (const auto* dll = std::get_if<DllHosting>(&hosting))
        return dll->host_path;
    return std::get<ExeHosting>(hosting).image_path;
}

std::vector<std::string> ServiceRecord::process_params() const
{
    if (const auto* dll = std::get_if<DllHosting>(&hosting))
        return {"-k", dll->group};
    return std::get<ExeHosting>(hosting).params;
}

Placement ServiceRecord::owner() const
{
    if (const auto vm = vm_suffix(name))
        return Placement::in_vm(*vm);
    return Placement::host();
}

std::optional<std::string> ServiceRecord::clone_of() const
{
    if (!is_virtualized(name))
        return std::nullopt;
    return base_name(name);
}

void ServiceRecord::validate() const
{
    if (name.empty() || name.find('\\') != std::string::npos)
        throw Error(ErrorCode::MalformedRecord, "service name '" + name + "' is not valid");
    if (const auto* exe = std::get_if<ExeHosting>(&hosting)) {
        if (exe->image_path.empty())
            throw Error(ErrorCode::MalformedRecord, "service '" + name + "' has an empty image path");
    } else {
        const auto& dll = std::get<DllHosting>(hosting);
        if (dll.group.empty() || dll.service_dll.empty() || dll.host_path.empty())
            throw Error(ErrorCode::MalformedRecord, "service '" + name + "' needs a group, a service DLL and a host");
    }
}

RegistryPath service_key_path(std::string_view name)
{
    return RegistryPath::parse(kServicesKey).child(name);
}

ServiceRecord read_service_record(const Registry& reg, std::string_view name)
{
    const auto key = reg.open_key(service_key_path(name));
    if (!key)
        malformed(name, "key not found");

    ServiceRecord rec;
    const auto segs = reg.key_path(*key);
    rec.name = split(segs, '\\').back();

    const auto type = read_as<std::int64_t>(reg, *key, "Type", name);
    const auto image = read_as<std::string>(reg, *key, "ImagePath", name);
    if (!type)
        malformed(name, "missing Type");
    if (!image || image->empty())
        malformed(name, "missing ImagePath");
    auto args = read_as<StringList>(reg, *key, "Arguments", name).value_or(StringList{});

    if (*type == kOwnProcessType) {
        rec.hosting = ExeHosting{*image, std::move(args)};
    } else if (*type == kShareProcessType) {
        if (args.size() != 2 || args[0] != "-k" || args[1].empty())
            malformed(name, "shared service needs Arguments [-k, <group>]");
        const auto params = reg.open_key(service_key_path(name).child("Parameters"));
        const auto dll = params ? read_as<std::string>(reg, *params, "ServiceDll", name) : std::nullopt;
        if (!dll || dll->empty())
            malformed(name, "missing Parameters\\ServiceDll");
        rec.hosting = DllHosting{args[1], *dll, *image};
    } else {
        malformed(name, "unsupported Type " + std::to_string(*type));
    }

    const auto start = read_as<std::int64_t>(reg, *key, "Start", name).value_or(kManualStart);
    rec.start_type = start == kAutoStart ? StartType::Auto : StartType::Manual;
    rec.depends_on_services = read_as<StringList>(reg, *key, "DependOnService", name).value_or(StringList{});
    rec.depends_on_groups = read_as<StringList>(reg, *key, "DependOnGroup", name).value_or(StringList{});
    return rec;
}

void write_service_record(Registry& reg, const ServiceRecord& rec)
{
    rec.validate();
    const auto path = service_key_path(rec.name);
    const auto key = reg.create_key(path);
    reg.set_value(key, {"Start", rec.start_type == StartType::Auto ? kAutoStart : kManualStart});
    reg.set_value(key, {"ImagePath", rec.image_path()});
    if (const auto* dll = std::get_if<DllHosting>(&rec.hosting)) {
        reg.set_value(key, {"Type", kShareProcessType});
        reg.set_value(key, {"Arguments", rec.process_params()});
        reg.set_value(reg.create_key(path.child("Parameters")), {"ServiceDll", dll->service_dll});
    } else {
        reg.set_value(key, {"Type", kOwnProcessType});
        if (const auto& params = std::get<ExeHosting>(rec.hosting).params; !params.empty())
            reg.set_value(key, {"Arguments", params});
        else
            reg.delete_value(key, "Arguments");
    }
    if (!rec.depends_on_services.empty())
        reg.set_value(key, {"DependOnService", rec.depends_on_services});
    else
        reg.delete_value(key, "DependOnService");
    if (!rec.depends_on_groups.empty())
        reg.set_value(key, {"DependOnGroup", rec.depends_on_groups});
    else
        reg.delete_value(key, "DependOnGroup");
}

std::string_view to_string(StartType type) noexcept
{
    return type == StartType::Auto ? "Auto" : "Manual";
}

} // namespace svcvirt
