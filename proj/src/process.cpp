#include "svcvirt/process.hpp"

#include "svcvirt/error.hpp"
#include "svcvirt/monitor.hpp"

#include <algorithm>
#include <sstream>

namespace svcvirt {

std::string_view to_string(ProcessRole role) noexcept
{
    switch (role) {
    case ProcessRole::Core: return "core";
    case ProcessRole::SvcHost: return "svchost";
    case ProcessRole::ServiceExe: return "service-exe";
    }
    return "?";
}

std::string Process::command_line() const
{
    std::string out = image_path;
    for (const auto& p : params)
        out += " " + p;
    return out;
}

Thread* Process::thread_of(std::string_view service)
{
    for (auto& t : threads) {
        if (!t.service.empty() && iequals(t.service, service))
            return &t;
    }
    return nullptr;
}

ProcessTable::ProcessTable(const VmTable& vms, const ImageStore& images, ObjectNamespace& objects, Trace& trace)
    : vms_(vms), images_(images), objects_(objects), trace_(trace)
{
}

Process& ProcessTable::spawn(std::string path, std::vector<std::string> params, Placement placement, ProcessRole role)
{
    const Pid pid{next_pid_++};
    Process proc;
    proc.pid = pid;
    proc.image_path = std::move(path);
    proc.params = std::move(params);
    proc.placement = placement;
    proc.role = role;
    auto& p = procs_.emplace(pid.value, std::move(proc)).first->second;
    const auto cmd = p.command_line();
    trace_.append(pid, placement, "spawn", cmd, cmd);
    return p;
}

void ProcessTable::attach(Process& proc, const ServiceImage& image, std::string service)
{
    Thread t;
    t.tid = static_cast<std::uint32_t>(proc.threads.size());
    t.service = std::move(service);
    t.image = &image;
    const auto arg = t.service.empty() ? image.id : t.service;
    proc.threads.push_back(std::move(t));
    trace_.append(proc.pid, proc.placement, "attach-thread", arg, arg);
}

Pid ProcessTable::spawn_scm()
{
    auto& scm = spawn(std::string(kScmImagePath), {}, Placement::host(), ProcessRole::Core);
    scm.threads.push_back(Thread{});
    return scm.pid;
}

Pid ProcessTable::spawn_core(const ServiceImage& image, std::string_view path)
{
    if (iequals(path, kScmImagePath)) {
        if (auto* scm = find(Pid{1}); scm != nullptr && iequals(scm->image_path, kScmImagePath)) {
            attach(*scm, image, {});
            return scm->pid;
        }
    }
    auto& proc = spawn(std::string(path), {}, Placement::host(), ProcessRole::Core);
    attach(proc, image, {});
    return proc.pid;
}

Pid ProcessTable::launch_service(const ServiceRecord& record)
{
    if (const auto* dll = std::get_if<DllHosting>(&record.hosting)) {
        const std::vector<std::string> params{"-k", dll->group};
        const auto placement = classify_process(vms_, dll->host_path, params);
        const auto* image = images_.at_path(dll->service_dll);
        if (image == nullptr)
            throw Error(ErrorCode::UnknownImage, "no image installed at " + dll->service_dll);
        const auto key = std::make_pair(to_lower(dll->group), placement.str());
        Process* host = nullptr;
        if (const auto it = svchosts_.find(key); it != svchosts_.end())
            host = find(it->second);
        if (host == nullptr || !host->live) {
            host = &spawn(dll->host_path, params, placement, ProcessRole::SvcHost);
            host->group = dll->group;
            svchosts_[key] = host->pid;
        }
        attach(*host, *image, record.name);
        return host->pid;
    }

    const auto path = record.image_path();
    auto params = record.process_params();
    const auto placement = classify_process(vms_, path, params);
    const auto* image = images_.at_path(path);
    if (image == nullptr)
        throw Error(ErrorCode::UnknownImage, "no image installed at " + path);
    auto& proc = spawn(path, std::move(params), placement, ProcessRole::ServiceExe);
    attach(proc, *image, record.name);
    return proc.pid;
}

void ProcessTable::retire_service(Pid pid, std::string_view service)
{
    auto* proc = find(pid);
    if (proc == nullptr || !proc->live)
        return;
    if (auto* t = proc->thread_of(service))
        t->retired = true;
    if (proc->role == ProcessRole::Core)
        return;
    if (std::all_of(proc->threads.begin(), proc->threads.end(), [](const Thread& t) { return t.retired; }))
        exit(*proc);
}

void ProcessTable::finish_core_thread(Pid pid, std::uint32_t tid)
{
    if (auto* proc = find(pid); proc != nullptr && tid < proc->threads.size())
        proc->threads[tid].retired = true;
}

void ProcessTable::exit(Process& proc)
{
    proc.live = false;
    trace_.append(proc.pid, proc.placement, "exit", proc.image_path, proc.image_path);
    objects_.delete_created_by(proc.pid);
    proc.handles.clear();
    if (proc.role == ProcessRole::SvcHost)
        svchosts_.erase(std::make_pair(to_lower(proc.group), proc.placement.str()));
}

Placement ProcessTable::placement_of(Pid pid) const
{
    return get(pid).placement;
}

Process* ProcessTable::find(Pid pid)
{
    const auto it = procs_.find(pid.value);
    return it == procs_.end() ? nullptr : &it->second;
}

const Process* ProcessTable::find(Pid pid) const
{
    const auto it = procs_.find(pid.value);
    return it == procs_.end() ? nullptr : &it->second;
}

const Process& ProcessTable::get(Pid pid) const
{
    if (const auto* p = find(pid))
        return *p;
    throw Error(ErrorCode::UnknownProcess, "unknown pid " + std::to_string(pid.value));
}

std::string ProcessTable::dump() const
{
    std::ostringstream os;
    for (const auto& [pid, p] : procs_) {
        std::vector<std::string> services;
        for (const auto& t : p.threads) {
            if (t.is_driver())
                services.push_back("<scm>");
            else
                services.push_back(t.service.empty() ? t.image->id : t.service);
        }
        os << "pid=" << pid << " role=" << to_string(p.role) << " vm=" << p.placement.str() << " live=" << p.live
           << " cmd=" << p.command_line() << " threads=" << join(services, ",") << '\n';
    }
    return os.str();
}

} // namespace svcvirt
