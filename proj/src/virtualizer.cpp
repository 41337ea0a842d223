#include "svcvirt/virtualizer.hpp"

#include "svcvirt/error.hpp"
#include "svcvirt/service_name.hpp"
#include "svcvirt/workspace.hpp"

#include <set>

namespace svcvirt {

namespace {

std::vector<std::string> suffixed(const std::vector<std::string>& names, VmId vm)
{
    std::vector<std::string> out;
    for (const auto& n : names)
        out.push_back(virtualized_name(n, vm));
    return out;
}

} // namespace

ServiceRecord clone_record(const ServiceRecord& original, VmId vm)
{
    ServiceRecord clone = original;
    clone.name = virtualized_name(original.name, vm);
    clone.depends_on_services = suffixed(original.depends_on_services, vm);
    clone.start_type = StartType::Manual;
    if (auto* dll = std::get_if<DllHosting>(&clone.hosting))
        dll->group = virtualized_name(dll->group, vm);
    else
        std::get<ExeHosting>(clone.hosting).image_path = remap_file_path(original.image_path(), vm);
    return clone;
}

std::vector<HardCodedName> scan_script(const std::vector<Action>& script)
{
    std::vector<HardCodedName> out;
    for (std::size_t i = 0; i < script.size(); ++i) {
        const ServiceRef* ref = nullptr;
        ApiClass api = ApiClass::ServiceApi;
        if (const auto* r = std::get_if<action::RegisterCtrlHandler>(&script[i])) {
            ref = &r->name;
        } else if (const auto* o = std::get_if<action::OpenService>(&script[i])) {
            ref = &o->name;
        } else if (const auto* s = std::get_if<action::StringApiUse>(&script[i])) {
            ref = &s->name;
            api = ApiClass::StringApi;
        }
        if (ref != nullptr && ref->hard_coded)
            out.push_back({i, api, *ref->hard_coded});
    }
    return out;
}

std::vector<HardCodedName> scan_image_for_hardcoded_names(const ImageStore& images, std::string_view image_id)
{
    return scan_script(images.get(image_id).script);
}

Virtualizer::Virtualizer(Registry& registry, ServiceControlManager& scm, const VmTable& vms, ImageStore& images,
                         NameRewriteTable& rewrites)
    : registry_(registry), scm_(scm), vms_(vms), images_(images), rewrites_(rewrites)
{
}

VirtualizationPlan Virtualizer::plan(std::string_view name, VmId vm) const
{
    const auto* rec = scm_.find(name);
    if (rec == nullptr)
        throw Error(ErrorCode::UnknownService, "unknown service: " + std::string(name));
    if (rec->clone_of())
        throw Error(ErrorCode::NotOriginal, rec->name + " is itself a virtualized service");
    if (!vms_.is_live(vm))
        throw Error(ErrorCode::UnknownVm, "unknown VM " + std::to_string(vm.value));
    if (scm_.find(virtualized_name(rec->name, vm)) != nullptr)
        throw Error(ErrorCode::AlreadyVirtualized, rec->name + " already has a clone in VM " + std::to_string(vm.value));

    // Rejects cycles and dangling dependencies before anything is written.
    const std::string root = rec->name;
    const auto order = scm_.compute_start_order(std::span<const std::string>(&root, 1));

    std::set<std::string, CaseInsensitiveLess> closure{root};
    std::vector<std::string> work{root};
    while (!work.empty()) {
        const auto* r = scm_.find(work.back());
        work.pop_back();
        for (const auto& dep : r->depends_on_services) {
            const auto& canonical = scm_.find(dep)->name;
            if (closure.insert(canonical).second)
                work.push_back(canonical);
        }
    }

    VirtualizationPlan p{root, vm, {}, {}};
    for (const auto& s : order) {
        if (!closure.contains(s) || scm_.find(virtualized_name(s, vm)) != nullptr)
            continue;
        const auto* r = scm_.find(s);
        if (r->clone_of())
            throw Error(ErrorCode::NotOriginal, r->name + " is itself a virtualized service");
        if (!r->is_dll() && images_.at_path(r->image_path()) == nullptr)
            throw Error(ErrorCode::UnknownImage, "no image installed at " + r->image_path());
        p.closure.push_back(s);
        p.rewrites.emplace_back(s, virtualized_name(s, vm));
    }
    return p;
}

ServiceRecord Virtualizer::clone_scm_entries(std::string_view name, VmId vm)
{
    const auto* original = scm_.find(name);
    if (original == nullptr)
        throw Error(ErrorCode::UnknownService, "unknown service: " + std::string(name));
    const auto clone_name = virtualized_name(original->name, vm);
    const auto src = service_key_path(original->name);
    const auto dst = service_key_path(clone_name);
    registry_.copy_subtree(src, dst);

    const auto key = *registry_.open_key(dst);
    if (const auto deps = registry_.get_value(key, "DependOnService")) {
        if (const auto* list = std::get_if<StringList>(&deps->payload))
            registry_.set_value(key, {"DependOnService", suffixed(*list, vm)});
    }
    registry_.set_value(key, {"Start", kManualStart});
    if (original->is_dll()) {
        auto args = original->process_params();
        args.back() = virtualized_name(args.back(), vm);
        registry_.set_value(key, {"Arguments", args});
    } else {
        registry_.set_value(key, {"ImagePath", remap_file_path(original->image_path(), vm)});
    }
    return read_service_record(registry_, clone_name);
}

std::string Virtualizer::virtualize_service(std::string_view name, VmId vm)
{
    const auto p = plan(name, vm);
    for (const auto& s : p.closure) {
        const auto original = *scm_.find(s);

        const auto clone = clone_scm_entries(s, vm);
        note('a', s, vm);

        scm_.create_service(clone);
        note('b', s, vm);

        if (!original.is_dll()) {
            images_.install(clone.image_path(), images_.at_path(original.image_path())->id);
            note('c', s, vm);
        }

        rewrites_.add(vm, s, clone.name);
        note('d', s, vm);
    }
    return virtualized_name(p.target, vm);
}

void Virtualizer::note(char step, std::string_view target, VmId vm)
{
    log_.push_back("virtualize step=" + std::string(1, step) + " target=" + std::string(target) +
                   " vm=" + std::to_string(vm.value));
}

} // namespace svcvirt
