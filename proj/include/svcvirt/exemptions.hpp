#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace svcvirt {

// One line of an exemption list: a literal object path, or a prefix followed
// by `*`, which matches the prefix plus one or more decimal digits.
class ExemptionPattern {
public:
    static ExemptionPattern literal(std::string name);
    static ExemptionPattern numeric_wildcard(std::string prefix);
    static ExemptionPattern parse(std::string_view line);

    bool is_wildcard() const { return wildcard_; }
    const std::string& text() const { return text_; }
    bool matches(std::string_view name) const noexcept;
    std::string str() const { return wildcard_ ? text_ + "*" : text_; }

    bool operator==(const ExemptionPattern& other) const;

private:
    ExemptionPattern(std::string text, bool wildcard) : text_(std::move(text)), wildcard_(wildcard) {}

    std::string text_;
    bool wildcard_;
};

class ExemptionList {
public:
    ExemptionList() = default;
    explicit ExemptionList(std::vector<ExemptionPattern> patterns);

    // The IPC objects through which virtualized services reach the host's
    // core processes (SCM, Lsass, WinLogon).
    static ExemptionList defaults();
    static std::string_view default_file_text();

    // One pattern per line; blank lines and `#` comments are skipped.
    static ExemptionList parse(std::string_view text);
    static ExemptionList load(const std::string& path);

    bool matches(std::string_view name) const noexcept;
    bool contains(const ExemptionPattern& pattern) const;
    // Adds patterns not already present; returns how many were new.
    std::size_t merge(const std::vector<ExemptionPattern>& patterns);

    const std::vector<ExemptionPattern>& patterns() const { return patterns_; }
    bool empty() const { return patterns_.empty(); }
    std::size_t size() const { return patterns_.size(); }

    std::string format() const;

private:
    std::vector<ExemptionPattern> patterns_;
};

} // namespace svcvirt
