#include "svcvirt/image.hpp"

#include "svcvirt/error.hpp"

#include <algorithm>

namespace svcvirt {

std::string_view action_tag(const Action& a) noexcept
{
    static constexpr std::string_view tags[] = {
        "connect-control-pipe", "register-ctrl-handler", "open-service", "string-api-use",
        "create-object",        "open-object",           "delete-object", "wait-for-service",
        "signal-running",       "sleep",                 "stop",          "fail",
    };
    return tags[a.index()];
}

std::string_view to_string(ImageRole role) noexcept
{
    return role == ImageRole::Core ? "core" : "service";
}

void ServiceImage::validate() const
{
    if (id.empty())
        throw Error(ErrorCode::MalformedImage, "image without id");
    for (const auto& a : script) {
        if (const auto* c = std::get_if<action::CreateObject>(&a))
            ObjectName::parse(c->name);
        else if (const auto* o = std::get_if<action::OpenObject>(&a))
            ObjectName::parse(o->name);
        else if (const auto* d = std::get_if<action::DeleteObject>(&a))
            ObjectName::parse(d->name);
    }
    if (role == ImageRole::Core)
        return;
    const bool ends_start = std::any_of(script.begin(), script.end(), [](const Action& a) {
        return std::holds_alternative<action::SignalRunning>(a) || std::holds_alternative<action::Fail>(a);
    });
    if (!ends_start)
        throw Error(ErrorCode::MalformedImage, "image " + id + " never signals running or fails");
}

void ImageStore::add(ServiceImage image)
{
    image.validate();
    const auto id = image.id;
    images_.insert_or_assign(id, std::move(image));
}

void ImageStore::install(std::string_view path, std::string_view image_id)
{
    if (!contains(image_id))
        throw Error(ErrorCode::UnknownImage, "unknown image: " + std::string(image_id));
    paths_.insert_or_assign(std::string(path), images_.find(image_id)->first);
}

const ServiceImage& ImageStore::get(std::string_view image_id) const
{
    const auto it = images_.find(image_id);
    if (it == images_.end())
        throw Error(ErrorCode::UnknownImage, "unknown image: " + std::string(image_id));
    return it->second;
}

const ServiceImage* ImageStore::at_path(std::string_view path) const
{
    const auto it = paths_.find(path);
    return it == paths_.end() ? nullptr : &get(it->second);
}

std::optional<std::string> ImageStore::path_of(std::string_view image_id) const
{
    for (const auto& [p, id] : paths_) {
        if (iequals(id, image_id))
            return p;
    }
    return std::nullopt;
}

std::vector<std::string> ImageStore::paths() const
{
    std::vector<std::string> out;
    for (const auto& [p, _] : paths_)
        out.push_back(p);
    return out;
}

std::vector<std::string> ImageStore::ids() const
{
    std::vector<std::string> out;
    for (const auto& [id, _] : images_)
        out.push_back(id);
    return out;
}

} // namespace svcvirt
