#pragma once

#include "svcvirt/text.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace svcvirt {

// Backslash-separated key path. Segments compare case-insensitively but keep
// the casing they were written with.
class RegistryPath {
public:
    static RegistryPath parse(std::string_view text);
    explicit RegistryPath(std::vector<std::string> segments);

    const std::vector<std::string>& segments() const { return segments_; }
    std::string str() const;
    RegistryPath child(std::string_view segment) const;

    bool operator==(const RegistryPath& other) const;

private:
    std::vector<std::string> segments_;
};

using StringList = std::vector<std::string>;
using RegistryPayload = std::variant<std::string, StringList, std::int64_t>;

struct RegistryValue {
    std::string name;
    RegistryPayload payload;

    bool operator==(const RegistryValue& other) const;
};

std::string format_payload(const RegistryPayload& payload);

struct KeyHandle {
    std::uint64_t id = 0;
    auto operator<=>(const KeyHandle&) const = default;
};

// One row of an exhaustive subtree walk. `relative_path` is empty for the
// walked root itself; key rows carry no value.
struct RegistryEntry {
    std::string relative_path;
    std::optional<RegistryValue> value;

    bool operator==(const RegistryEntry& other) const;
};

class Registry {
public:
    Registry();
    ~Registry();
    Registry(const Registry&) = delete;
    Registry& operator=(const Registry&) = delete;

    // Open-or-create; missing parents are created on the way.
    KeyHandle create_key(const RegistryPath& path);
    std::optional<KeyHandle> open_key(const RegistryPath& path) const;
    bool key_exists(const RegistryPath& path) const { return open_key(path).has_value(); }
    void delete_key(const RegistryPath& path);

    void set_value(KeyHandle key, RegistryValue value);
    std::optional<RegistryValue> get_value(KeyHandle key, std::string_view name) const;
    bool delete_value(KeyHandle key, std::string_view name);

    std::vector<std::string> subkeys(KeyHandle key) const;
    std::vector<RegistryValue> values(KeyHandle key) const;
    std::string key_path(KeyHandle key) const;

    // Deep copy; returns the number of values copied.
    std::size_t copy_subtree(const RegistryPath& src, const RegistryPath& dst);

    std::vector<RegistryEntry> enumerate(const RegistryPath& root) const;

    // `<full\path> <name> = <payload>` per value, sorted case-insensitively.
    std::string dump() const;

private:
    struct Node;

    Node& node(KeyHandle key) const;
    Node* find(const RegistryPath& path) const;
    void forget(Node& node);
    std::unique_ptr<Node> clone(const Node& src, Node* parent, std::size_t& values);
    void walk(const Node& n, const std::string& rel, std::vector<RegistryEntry>& out) const;

    std::unique_ptr<Node> root_;
    std::unordered_map<std::uint64_t, Node*> live_;
    std::uint64_t next_id_ = 1;
};

} // namespace svcvirt
