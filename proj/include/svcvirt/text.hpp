#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace svcvirt {

// ASCII-only case folding. Windows object, registry and service names used
// by the simulator are plain ASCII.
char fold(char c) noexcept;
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
bool iequals(std::string_view a, std::string_view b) noexcept;
bool istarts_with(std::string_view s, std::string_view prefix) noexcept;
bool iends_with(std::string_view s, std::string_view suffix) noexcept;
int icompare(std::string_view a, std::string_view b) noexcept;
bool is_digits(std::string_view s) noexcept;

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

struct CaseInsensitiveLess {
    using is_transparent = void;
    bool operator()(std::string_view a, std::string_view b) const noexcept
    {
        return icompare(a, b) < 0;
    }
};

} // namespace svcvirt
