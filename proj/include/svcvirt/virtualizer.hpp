#pragma once

#include "svcvirt/image.hpp"
#include "svcvirt/registry.hpp"
#include "svcvirt/rewrite_table.hpp"
#include "svcvirt/scm.hpp"
#include "svcvirt/service_record.hpp"
#include "svcvirt/vm_table.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace svcvirt {

struct VirtualizationPlan {
    std::string target;
    VmId vm;
    // Services still to clone, dependencies first; the target comes last.
    std::vector<std::string> closure;
    std::vector<std::pair<std::string, std::string>> rewrites;
};

// The clone of `original` for `vm`: suffixed name, suffixed DependOnService
// entries, manual start, and for shared services a suffixed group; EXE images
// move into the VM workspace. Nothing else changes.
ServiceRecord clone_record(const ServiceRecord& original, VmId vm);

struct HardCodedName {
    std::size_t index;
    ApiClass api;
    std::string literal;
    bool operator==(const HardCodedName&) const = default;
};

std::vector<HardCodedName> scan_script(const std::vector<Action>& script);
std::vector<HardCodedName> scan_image_for_hardcoded_names(const ImageStore& images, std::string_view image_id);

class Virtualizer {
public:
    Virtualizer(Registry& registry, ServiceControlManager& scm, const VmTable& vms, ImageStore& images,
                NameRewriteTable& rewrites);

    VirtualizationPlan plan(std::string_view name, VmId vm) const;

    // Clones the service and every not-yet-cloned service it depends on into
    // `vm`, registers the clones with SCM and installs EXE images in the VM
    // workspace. Nothing is started. Returns the clone's name.
    std::string virtualize_service(std::string_view name, VmId vm);

    // Registry half of the clone: copies the service key and edits it in place.
    ServiceRecord clone_scm_entries(std::string_view name, VmId vm);

    // `virtualize step=<a-d> target=<service> vm=<id>` per completed step.
    const std::vector<std::string>& log() const { return log_; }

private:
    void note(char step, std::string_view target, VmId vm);

    Registry& registry_;
    ServiceControlManager& scm_;
    const VmTable& vms_;
    ImageStore& images_;
    NameRewriteTable& rewrites_;
    std::vector<std::string> log_;
};

} // namespace svcvirt
