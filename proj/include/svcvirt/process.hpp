#pragma once

#include "svcvirt/image.hpp"
#include "svcvirt/object_namespace.hpp"
#include "svcvirt/scm.hpp"
#include "svcvirt/trace.hpp"
#include "svcvirt/types.hpp"
#include "svcvirt/vm_table.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace svcvirt {

inline constexpr std::string_view kScmImagePath = "c:\\WINNT\\system32\\services.exe";

enum class ProcessRole { Core, SvcHost, ServiceExe };

std::string_view to_string(ProcessRole role) noexcept;

struct Thread {
    std::uint32_t tid = 0;
    std::string service;                 // empty for core threads
    const ServiceImage* image = nullptr; // null for the SCM driver
    std::size_t cursor = 0;
    std::uint32_t sleep_left = 0;
    bool sleeping = false;
    bool retired = false;                // service ended, or core script done

    bool is_driver() const { return image == nullptr; }
    bool has_actions() const { return !retired && image != nullptr && cursor < image->script.size(); }
};

struct HeldObject {
    ObjectHandle handle;
    ObjectKind kind;
};

struct Process {
    Pid pid;
    std::string image_path;
    std::vector<std::string> params;
    Placement placement = Placement::host();
    ProcessRole role = ProcessRole::Core;
    std::string group;  // svchost only
    std::vector<Thread> threads;
    bool live = true;
    // Handles by the name the process used (before renaming).
    std::map<std::string, HeldObject, CaseInsensitiveLess> handles;

    std::string command_line() const;
    Thread* thread_of(std::string_view service);
};

// Live and exited processes. Service processes are placed once, at spawn,
// from their image path and parameters.
class ProcessTable : public ServiceLauncher {
public:
    ProcessTable(const VmTable& vms, const ImageStore& images, ObjectNamespace& objects, Trace& trace);

    // pid 1, host, with the SCM driver as thread 0.
    Pid spawn_scm();
    // Host-only. An image installed at the SCM's own path runs inside pid 1.
    Pid spawn_core(const ServiceImage& image, std::string_view path);

    Pid launch_service(const ServiceRecord& record) override;
    void retire_service(Pid pid, std::string_view service) override;
    Placement placement_of(Pid pid) const override;

    Process* find(Pid pid);
    const Process* find(Pid pid) const;
    const Process& get(Pid pid) const;
    std::map<std::uint32_t, Process>& all() { return procs_; }
    const std::map<std::uint32_t, Process>& all() const { return procs_; }

    // Retires a core thread whose script ran out; core processes never exit.
    void finish_core_thread(Pid pid, std::uint32_t tid);

    // `pid=<p> role=<r> vm=<v> live=<0|1> cmd=<command line> threads=<svc,...>`
    std::string dump() const;

private:
    Process& spawn(std::string path, std::vector<std::string> params, Placement placement, ProcessRole role);
    void attach(Process& proc, const ServiceImage& image, std::string service);
    void exit(Process& proc);

    const VmTable& vms_;
    const ImageStore& images_;
    ObjectNamespace& objects_;
    Trace& trace_;
    std::map<std::uint32_t, Process> procs_;
    std::map<std::pair<std::string, std::string>, Pid> svchosts_;  // (group, placement) -> pid
    std::uint32_t next_pid_ = 1;
};

} // namespace svcvirt
