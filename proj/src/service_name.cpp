#include "svcvirt/service_name.hpp"

#include "svcvirt/text.hpp"

#include <charconv>

namespace svcvirt {

namespace {

// Length of the `-vm<digits>` tail, or 0.
std::size_t suffix_length(std::string_view name, std::uint32_t* id) noexcept
{
    std::size_t digits = 0;
    while (digits < name.size() && name[name.size() - 1 - digits] >= '0' && name[name.size() - 1 - digits] <= '9')
        ++digits;
    if (digits == 0 || name.size() <= digits + 3)
        return 0;
    const auto tag = name.substr(name.size() - digits - 3, 3);
    if (!iequals(tag, "-vm"))
        return 0;
    const auto number = name.substr(name.size() - digits);
    if (number.front() == '0')
        return 0;
    std::uint32_t value = 0;
    const auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
    if (ec != std::errc{} || ptr != number.data() + number.size())
        return 0;
    if (id != nullptr)
        *id = value;
    return digits + 3;
}

} // namespace

std::optional<VmId> vm_suffix(std::string_view name) noexcept
{
    std::uint32_t id = 0;
    if (suffix_length(name, &id) == 0)
        return std::nullopt;
    return VmId{id};
}

std::string base_name(std::string_view name)
{
    const auto n = suffix_length(name, nullptr);
    return std::string(name.substr(0, name.size() - n));
}

std::string virtualized_name(std::string_view base, VmId vm)
{
    return std::string(base) + "-vm" + std::to_string(vm.value);
}

} // namespace svcvirt
