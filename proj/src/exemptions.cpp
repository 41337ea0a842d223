#include "svcvirt/exemptions.hpp"

#include "svcvirt/error.hpp"
#include "svcvirt/text.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace svcvirt {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

void check_object_path(std::string_view text)
{
    if (text.size() < 2 || text.front() != '\\' || text.back() == '\\')
        throw Error(ErrorCode::MalformedPattern, "malformed exemption pattern '" + std::string(text) + "'");
}

} // namespace

ExemptionPattern ExemptionPattern::literal(std::string name)
{
    check_object_path(name);
    if (name.find('*') != std::string::npos)
        throw Error(ErrorCode::MalformedPattern, "'*' is only allowed as a trailing wildcard: " + name);
    return ExemptionPattern(std::move(name), false);
}

ExemptionPattern ExemptionPattern::numeric_wildcard(std::string prefix)
{
    check_object_path(prefix);
    if (prefix.find('*') != std::string::npos)
        throw Error(ErrorCode::MalformedPattern, "'*' is only allowed as a trailing wildcard: " + prefix);
    return ExemptionPattern(std::move(prefix), true);
}

ExemptionPattern ExemptionPattern::parse(std::string_view line)
{
    line = trim(line);
    if (!line.empty() && line.back() == '*')
        return numeric_wildcard(std::string(line.substr(0, line.size() - 1)));
    return literal(std::string(line));
}

bool ExemptionPattern::matches(std::string_view name) const noexcept
{
    if (!wildcard_)
        return iequals(name, text_);
    return istarts_with(name, text_) && is_digits(name.substr(text_.size()));
}

bool ExemptionPattern::operator==(const ExemptionPattern& other) const
{
    return wildcard_ == other.wildcard_ && iequals(text_, other.text_);
}

ExemptionList::ExemptionList(std::vector<ExemptionPattern> patterns)
{
    merge(patterns);
}

ExemptionList ExemptionList::defaults()
{
    return parse(default_file_text());
}

ExemptionList ExemptionList::parse(std::string_view text)
{
    std::vector<ExemptionPattern> patterns;
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#')
            continue;
        try {
            patterns.push_back(ExemptionPattern::parse(line));
        } catch (const Error& e) {
            throw Error(ErrorCode::MalformedPattern, "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return ExemptionList(std::move(patterns));
}

ExemptionList ExemptionList::load(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::ParseError, "cannot read exemption list '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

bool ExemptionList::matches(std::string_view name) const noexcept
{
    return std::any_of(patterns_.begin(), patterns_.end(), [&](const auto& p) { return p.matches(name); });
}

bool ExemptionList::contains(const ExemptionPattern& pattern) const
{
    return std::find(patterns_.begin(), patterns_.end(), pattern) != patterns_.end();
}

std::size_t ExemptionList::merge(const std::vector<ExemptionPattern>& patterns)
{
    std::size_t added = 0;
    for (const auto& p : patterns) {
        if (!contains(p)) {
            patterns_.push_back(p);
            ++added;
        }
    }
    return added;
}

std::string ExemptionList::format() const
{
    std::string out;
    for (const auto& p : patterns_)
        out += p.str() + "\n";
    return out;
}

} // namespace svcvirt
