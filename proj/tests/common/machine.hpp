#pragma once

// Small scenario builder for tests that drive a booted kernel directly.

#include "svcvirt/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

namespace testing {

using nlohmann::json;

inline json well_behaved_script()
{
    return json::array({{{"op", "connect-control-pipe"}},
                        {{"op", "register-ctrl-handler"}, {"name", "self"}},
                        {{"op", "signal-running"}}});
}

struct MachineSpec {
    json doc = {{"name", "unit"}, {"step_limit", 100000}, {"images", json::array()}, {"services", json::array()}};

    MachineSpec& image(const std::string& id, const std::string& path, json script = well_behaved_script())
    {
        doc["images"].push_back({{"id", id}, {"path", path}, {"script", std::move(script)}});
        return *this;
    }
    MachineSpec& core(const std::string& id, const std::string& path, json script)
    {
        doc["images"].push_back({{"id", id}, {"role", "core"}, {"path", path}, {"script", std::move(script)}});
        doc["core_processes"].push_back(id);
        return *this;
    }
    // DLL service with its own image at `<name>.dll`.
    MachineSpec& dll(const std::string& name, const std::string& group, bool autostart,
                     std::vector<std::string> deps = {}, json script = well_behaved_script())
    {
        const auto path = "c:\\svc\\" + name + ".dll";
        image(name + "-img", path, std::move(script));
        json s = {{"name", name}, {"dll", path}, {"group", group}, {"start", autostart ? "auto" : "manual"}};
        if (!deps.empty())
            s["depends_on"] = deps;
        doc["services"].push_back(std::move(s));
        return *this;
    }
    MachineSpec& exe(const std::string& name, bool autostart, std::vector<std::string> deps = {},
                     json script = well_behaved_script())
    {
        const auto path = "c:\\svc\\" + name + ".exe";
        image(name + "-img", path, std::move(script));
        json s = {{"name", name}, {"image_path", path}, {"start", autostart ? "auto" : "manual"}};
        if (!deps.empty())
            s["depends_on"] = deps;
        doc["services"].push_back(std::move(s));
        return *this;
    }

    svcvirt::Scenario scenario() const { return svcvirt::parse_scenario(doc.dump(), "unit"); }

    std::unique_ptr<svcvirt::Kernel> boot(svcvirt::RunOptions options = {}) const
    {
        return svcvirt::boot_scenario(scenario(), options);
    }
};

inline std::vector<svcvirt::TraceEvent> events_where(const svcvirt::Kernel& k, const std::string& op,
                                                     const std::string& arg)
{
    std::vector<svcvirt::TraceEvent> out;
    for (const auto& e : k.trace().events())
        if (e.op == op && svcvirt::iequals(e.arg, arg))
            out.push_back(e);
    return out;
}

// Index of the first event with this op and arg, or -1.
inline long index_of(const svcvirt::Kernel& k, const std::string& op, const std::string& arg)
{
    const auto& ev = k.trace().events();
    for (std::size_t i = 0; i < ev.size(); ++i)
        if (ev[i].op == op && svcvirt::iequals(ev[i].arg, arg))
            return static_cast<long>(i);
    return -1;
}

} // namespace testing
