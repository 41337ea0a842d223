#include "svcvirt/workspace.hpp"

#include "svcvirt/error.hpp"
#include "svcvirt/text.hpp"

#include <charconv>

namespace svcvirt {

namespace {

constexpr std::string_view kWorkspaceRoot = "c:\\fvms\\VM-";

bool is_letter(char c) noexcept
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

} // namespace

std::string workspace_prefix(VmId vm)
{
    return std::string(kWorkspaceRoot) + std::to_string(vm.value) + "\\";
}

std::optional<VmId> workspace_vm(std::string_view path)
{
    if (!istarts_with(path, kWorkspaceRoot))
        return std::nullopt;
    const auto rest = path.substr(kWorkspaceRoot.size());
    const auto end = rest.find('\\');
    if (end == std::string_view::npos)
        return std::nullopt;
    const auto digits = rest.substr(0, end);
    if (!is_digits(digits) || digits.front() == '0')
        return std::nullopt;
    std::uint32_t id = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
    if (ec != std::errc{} || ptr != digits.data() + digits.size())
        return std::nullopt;
    return VmId{id};
}

bool is_drive_path(std::string_view path) noexcept
{
    return path.size() >= 3 && is_letter(path[0]) && path[1] == ':' && path[2] == '\\';
}

std::string remap_file_path(std::string_view path, VmId vm)
{
    if (!is_drive_path(path))
        throw Error(ErrorCode::RelativePath, "not an absolute drive path: '" + std::string(path) + "'");
    if (istarts_with(path, workspace_prefix(vm)))
        return std::string(path);
    std::string out = workspace_prefix(vm);
    out += to_upper(path.substr(0, 1));
    out += path.substr(2);
    return out;
}

} // namespace svcvirt
