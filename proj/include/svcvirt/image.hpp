#pragma once

#include "svcvirt/object_namespace.hpp"
#include "svcvirt/text.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace svcvirt {

// A service name as it appears in a binary: either the name SCM started the
// service under, or a literal compiled into the image.
struct ServiceRef {
    std::optional<std::string> hard_coded;

    static ServiceRef self() { return {}; }
    static ServiceRef literal(std::string name) { return {std::move(name)}; }

    bool is_self() const { return !hard_coded.has_value(); }
    std::string resolve(std::string_view self_name) const { return hard_coded ? *hard_coded : std::string(self_name); }
    bool operator==(const ServiceRef&) const = default;
};

namespace action {

struct ConnectControlPipe {
    bool operator==(const ConnectControlPipe&) const = default;
};
struct RegisterCtrlHandler {
    ServiceRef name;
    bool operator==(const RegisterCtrlHandler&) const = default;
};
struct OpenService {
    ServiceRef name;
    bool operator==(const OpenService&) const = default;
};
struct StringApiUse {
    ServiceRef name;
    bool operator==(const StringApiUse&) const = default;
};
// Object actions are non-fatal unless `fatal` is set: a failed optional open
// is logged and the script moves on.
struct CreateObject {
    ObjectKind kind;
    std::string name;
    bool fatal = false;
    bool operator==(const CreateObject&) const = default;
};
struct OpenObject {
    ObjectKind kind;
    std::string name;
    bool fatal = false;
    bool operator==(const OpenObject&) const = default;
};
struct DeleteObject {
    std::string name;
    bool operator==(const DeleteObject&) const = default;
};
struct WaitForService {
    std::string name;
    bool operator==(const WaitForService&) const = default;
};
struct SignalRunning {
    bool operator==(const SignalRunning&) const = default;
};
struct Sleep {
    std::uint32_t steps = 1;
    bool operator==(const Sleep&) const = default;
};
struct Stop {
    bool operator==(const Stop&) const = default;
};
struct Fail {
    std::string reason;
    bool operator==(const Fail&) const = default;
};

} // namespace action

using Action = std::variant<action::ConnectControlPipe, action::RegisterCtrlHandler, action::OpenService,
                            action::StringApiUse, action::CreateObject, action::OpenObject, action::DeleteObject,
                            action::WaitForService, action::SignalRunning, action::Sleep, action::Stop, action::Fail>;

// Short tag used in scenario files, e.g. `connect-control-pipe`.
std::string_view action_tag(const Action& a) noexcept;

enum class ImageRole { Service, Core };

std::string_view to_string(ImageRole role) noexcept;

struct ServiceImage {
    std::string id;
    ImageRole role = ImageRole::Service;
    std::vector<Action> script;

    // Service scripts must reach SignalRunning or an explicit Fail; object
    // names must parse.
    void validate() const;
};

// Image ids plus the file paths they are installed under. Paths compare
// case-insensitively; several paths may point at one image.
class ImageStore {
public:
    void add(ServiceImage image);
    void install(std::string_view path, std::string_view image_id);

    bool contains(std::string_view image_id) const { return images_.contains(image_id); }
    const ServiceImage& get(std::string_view image_id) const;
    const ServiceImage* at_path(std::string_view path) const;
    // First installed path of the image, by case-insensitive order.
    std::optional<std::string> path_of(std::string_view image_id) const;
    std::vector<std::string> paths() const;
    std::vector<std::string> ids() const;

private:
    std::map<std::string, ServiceImage, CaseInsensitiveLess> images_;
    std::map<std::string, std::string, CaseInsensitiveLess> paths_;
};

} // namespace svcvirt
