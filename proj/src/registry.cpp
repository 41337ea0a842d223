#include "svcvirt/registry.hpp"

#include "svcvirt/error.hpp"

#include <algorithm>
#include <sstream>

namespace svcvirt {

struct Registry::Node {
    std::uint64_t id = 0;
    std::string name;
    Node* parent = nullptr;
    std::map<std::string, std::unique_ptr<Node>, CaseInsensitiveLess> children;
    std::map<std::string, RegistryValue, CaseInsensitiveLess> values;
};

RegistryPath RegistryPath::parse(std::string_view text)
{
    return RegistryPath(split(text, '\\'));
}

RegistryPath::RegistryPath(std::vector<std::string> segments) : segments_(std::move(segments))
{
    if (segments_.empty())
        throw Error(ErrorCode::MalformedPath, "registry path is empty");
    for (const auto& s : segments_) {
        if (s.empty() || s.find('\\') != std::string::npos)
            throw Error(ErrorCode::MalformedPath, "malformed registry path segment in '" + str() + "'");
    }
}

std::string RegistryPath::str() const
{
    return join(segments_, "\\");
}

RegistryPath RegistryPath::child(std::string_view segment) const
{
    auto segs = segments_;
    segs.emplace_back(segment);
    return RegistryPath(std::move(segs));
}

bool RegistryPath::operator==(const RegistryPath& other) const
{
    return std::equal(segments_.begin(), segments_.end(), other.segments_.begin(), other.segments_.end(),
                      [](const auto& a, const auto& b) { return iequals(a, b); });
}

bool RegistryValue::operator==(const RegistryValue& other) const
{
    return iequals(name, other.name) && payload == other.payload;
}

bool RegistryEntry::operator==(const RegistryEntry& other) const
{
    return iequals(relative_path, other.relative_path) && value == other.value;
}

std::string format_payload(const RegistryPayload& payload)
{
    if (const auto* s = std::get_if<std::string>(&payload))
        return "\"" + *s + "\"";
    if (const auto* list = std::get_if<StringList>(&payload))
        return "[" + join(*list, ", ") + "]";
    return std::to_string(std::get<std::int64_t>(payload));
}

Registry::Registry() : root_(std::make_unique<Node>()) {}

Registry::~Registry() = default;

Registry::Node& Registry::node(KeyHandle key) const
{
    const auto it = live_.find(key.id);
    if (it == live_.end())
        throw Error(ErrorCode::StaleHandle, "stale registry key handle " + std::to_string(key.id));
    return *it->second;
}

Registry::Node* Registry::find(const RegistryPath& path) const
{
    Node* cur = root_.get();
    for (const auto& seg : path.segments()) {
        const auto it = cur->children.find(seg);
        if (it == cur->children.end())
            return nullptr;
        cur = it->second.get();
    }
    return cur;
}

KeyHandle Registry::create_key(const RegistryPath& path)
{
    Node* cur = root_.get();
    for (const auto& seg : path.segments()) {
        auto it = cur->children.find(seg);
        if (it == cur->children.end()) {
            auto child = std::make_unique<Node>();
            child->id = next_id_++;
            child->name = seg;
            child->parent = cur;
            live_[child->id] = child.get();
            it = cur->children.emplace(seg, std::move(child)).first;
        }
        cur = it->second.get();
    }
    return KeyHandle{cur->id};
}

std::optional<KeyHandle> Registry::open_key(const RegistryPath& path) const
{
    if (const Node* n = find(path))
        return KeyHandle{n->id};
    return std::nullopt;
}

void Registry::forget(Node& n)
{
    live_.erase(n.id);
    for (auto& [_, child] : n.children)
        forget(*child);
}

void Registry::delete_key(const RegistryPath& path)
{
    Node* n = find(path);
    if (n == nullptr)
        throw Error(ErrorCode::KeyNotFound, "registry key not found: " + path.str());
    forget(*n);
    n->parent->children.erase(n->name);
}

void Registry::set_value(KeyHandle key, RegistryValue value)
{
    auto& n = node(key);
    auto it = n.values.find(value.name);
    if (it != n.values.end()) {
        it->second.payload = std::move(value.payload);
        return;
    }
    auto name = value.name;
    n.values.emplace(std::move(name), std::move(value));
}

std::optional<RegistryValue> Registry::get_value(KeyHandle key, std::string_view name) const
{
    const auto& n = node(key);
    const auto it = n.values.find(name);
    if (it == n.values.end())
        return std::nullopt;
    return it->second;
}

bool Registry::delete_value(KeyHandle key, std::string_view name)
{
    auto& n = node(key);
    const auto it = n.values.find(name);
    if (it == n.values.end())
        return false;
    n.values.erase(it);
    return true;
}

std::vector<std::string> Registry::subkeys(KeyHandle key) const
{
    std::vector<std::string> out;
    for (const auto& [_, child] : node(key).children)
        out.push_back(child->name);
    return out;
}

std::vector<RegistryValue> Registry::values(KeyHandle key) const
{
    std::vector<RegistryValue> out;
    for (const auto& [_, v] : node(key).values)
        out.push_back(v);
    return out;
}

std::string Registry::key_path(KeyHandle key) const
{
    std::vector<std::string> segs;
    for (const Node* n = &node(key); n->parent != nullptr; n = n->parent)
        segs.push_back(n->name);
    std::reverse(segs.begin(), segs.end());
    return join(segs, "\\");
}

std::unique_ptr<Registry::Node> Registry::clone(const Node& src, Node* parent, std::size_t& values)
{
    auto copy = std::make_unique<Node>();
    copy->id = next_id_++;
    copy->name = src.name;
    copy->parent = parent;
    copy->values = src.values;
    values += src.values.size();
    live_[copy->id] = copy.get();
    for (const auto& [key, child] : src.children)
        copy->children.emplace(key, clone(*child, copy.get(), values));
    return copy;
}

std::size_t Registry::copy_subtree(const RegistryPath& src, const RegistryPath& dst)
{
    const Node* source = find(src);
    if (source == nullptr)
        throw Error(ErrorCode::KeyNotFound, "copy source not found: " + src.str());
    if (find(dst) != nullptr)
        throw Error(ErrorCode::KeyExists, "copy destination already exists: " + dst.str());

    std::size_t copied = 0;
    // Snapshot first so a destination inside the source is not copied into itself.
    std::uint64_t scratch_start = next_id_;
    auto snapshot = clone(*source, nullptr, copied);
    for (auto id = scratch_start; id < next_id_; ++id)
        live_.erase(id);

    auto parent_segments = dst.segments();
    const std::string leaf = parent_segments.back();
    parent_segments.pop_back();
    Node* parent = parent_segments.empty() ? root_.get() : &node(create_key(RegistryPath(parent_segments)));

    copied = 0;
    auto copy = clone(*snapshot, parent, copied);
    copy->name = leaf;
    parent->children.emplace(leaf, std::move(copy));
    return copied;
}

void Registry::walk(const Node& n, const std::string& rel, std::vector<RegistryEntry>& out) const
{
    out.push_back(RegistryEntry{rel, std::nullopt});
    for (const auto& [_, v] : n.values)
        out.push_back(RegistryEntry{rel, v});
    for (const auto& [_, child] : n.children)
        walk(*child, rel.empty() ? child->name : rel + "\\" + child->name, out);
}

std::vector<RegistryEntry> Registry::enumerate(const RegistryPath& root) const
{
    const Node* n = find(root);
    if (n == nullptr)
        throw Error(ErrorCode::KeyNotFound, "registry key not found: " + root.str());
    std::vector<RegistryEntry> out;
    walk(*n, "", out);
    return out;
}

std::string Registry::dump() const
{
    std::vector<RegistryEntry> rows;
    for (const auto& [_, top] : root_->children)
        walk(*top, top->name, rows);
    std::erase_if(rows, [](const RegistryEntry& row) { return !row.value; });
    std::stable_sort(rows.begin(), rows.end(), [](const RegistryEntry& a, const RegistryEntry& b) {
        if (const int c = icompare(a.relative_path, b.relative_path); c != 0)
            return c < 0;
        return icompare(a.value->name, b.value->name) < 0;
    });
    std::ostringstream os;
    for (const auto& row : rows)
        os << row.relative_path << ' ' << row.value->name << " = " << format_payload(row.value->payload) << '\n';
    return os.str();
}

} // namespace svcvirt
