#include "svcvirt/rewrite_table.hpp"

#include "svcvirt/service_name.hpp"

namespace svcvirt {

std::string_view to_string(ApiClass c) noexcept
{
    return c == ApiClass::ServiceApi ? "service-api" : "string-api";
}

void NameRewriteTable::add(VmId vm, std::string_view original, std::string_view virtualized)
{
    table_[vm].insert_or_assign(std::string(original), std::string(virtualized));
}

std::optional<std::string> NameRewriteTable::lookup(VmId vm, std::string_view original) const
{
    const auto t = table_.find(vm);
    if (t == table_.end())
        return std::nullopt;
    const auto it = t->second.find(original);
    if (it == t->second.end())
        return std::nullopt;
    return it->second;
}

std::vector<std::pair<std::string, std::string>> NameRewriteTable::entries(VmId vm) const
{
    std::vector<std::pair<std::string, std::string>> out;
    if (const auto t = table_.find(vm); t != table_.end()) {
        for (const auto& [k, v] : t->second)
            out.emplace_back(k, v);
    }
    return out;
}

std::string NameRewriteTable::rewrite(const Placement& caller, ApiClass, std::string_view arg) const
{
    // Both API classes follow the same rule; the class only matters for
    // which call sites are intercepted at all.
    if (caller.is_host() || is_virtualized(arg) || !lookup(*caller.vm(), arg))
        return std::string(arg);
    return virtualized_name(arg, *caller.vm());
}

} // namespace svcvirt
