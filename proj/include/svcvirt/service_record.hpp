#pragma once

#include "svcvirt/registry.hpp"
#include "svcvirt/types.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace svcvirt {

inline constexpr std::string_view kServicesKey = "HKLM\\SYSTEM\\CurrentControlSet\\Services";
inline constexpr std::string_view kSvcHostKey = "HKLM\\SOFTWARE\\Microsoft\\WindowsNT\\CurrentVersion\\SvcHost";
inline constexpr std::string_view kDefaultSvcHostPath = "c:\\WINNT\\system32\\svchost.exe";

// Registry encoding of a service key:
//   Type            16 (own process) | 32 (shared svchost process)
//   Start           2 (auto) | 3 (manual)
//   ImagePath       executable; svchost.exe for shared services
//   Arguments       process parameters; `-k <group>` for shared services
//   Parameters\ServiceDll   the service DLL of a shared service
//   DependOnService, DependOnGroup
inline constexpr std::int64_t kOwnProcessType = 16;
inline constexpr std::int64_t kShareProcessType = 32;
inline constexpr std::int64_t kAutoStart = 2;
inline constexpr std::int64_t kManualStart = 3;

enum class StartType { Auto, Manual };

struct ExeHosting {
    std::string image_path;
    std::vector<std::string> params;
    bool operator==(const ExeHosting&) const = default;
};

struct DllHosting {
    std::string group;
    std::string service_dll;
    std::string host_path = std::string(kDefaultSvcHostPath);
    bool operator==(const DllHosting&) const = default;
};

struct ServiceRecord {
    std::string name;
    std::variant<ExeHosting, DllHosting> hosting;
    StartType start_type = StartType::Manual;
    std::vector<std::string> depends_on_services;
    std::vector<std::string> depends_on_groups;

    bool is_dll() const { return std::holds_alternative<DllHosting>(hosting); }
    // Group string of a DLL-hosted service; null for EXE services.
    const std::string* group() const;
    std::string image_path() const;
    std::vector<std::string> process_params() const;

    // Owner and origin follow from the `-vm<id>` suffix of the name.
    Placement owner() const;
    std::optional<std::string> clone_of() const;

    void validate() const;

    bool operator==(const ServiceRecord&) const = default;
};

RegistryPath service_key_path(std::string_view name);

// Throws MalformedServiceKey when Type/ImagePath/group/ServiceDll are missing.
ServiceRecord read_service_record(const Registry& registry, std::string_view name);

// Writes the record's fields under its Services key, leaving other values alone.
void write_service_record(Registry& registry, const ServiceRecord& record);

std::string_view to_string(StartType type) noexcept;

} // namespace svcvirt
