#include "svcvirt/kernel.hpp"

#include "svcvirt/error.hpp"

#include <algorithm>

namespace svcvirt {

Kernel::Kernel(ExemptionList exemptions)
    : objects_(vms_, std::move(exemptions)),
      monitor_(objects_, rewrites_),
      processes_(vms_, images_, objects_, trace_),
      scm_(registry_, objects_, processes_, trace_),
      virtualizer_(registry_, scm_, vms_, images_, rewrites_)
{
}

void Kernel::boot(const std::vector<std::string>& core_images)
{
    scm_.set_scm_pid(processes_.spawn_scm());
    for (const auto& id : core_images) {
        const auto& image = images_.get(id);
        const auto path = images_.path_of(id);
        if (!path)
            throw Error(ErrorCode::UnknownImage, "core image " + id + " has no install path");
        processes_.spawn_core(image, *path);
    }
    scm_.load_database();
    scm_.start_auto_services();
}

std::vector<Kernel::ThreadKey> Kernel::runnable()
{
    std::vector<ThreadKey> out;
    for (const auto& [pid, proc] : processes_.all()) {
        if (!proc.live)
            continue;
        for (const auto& t : proc.threads) {
            if (t.is_driver() ? scm_.has_work() : t.has_actions())
                out.emplace_back(pid, t.tid);
        }
    }
    return out;
}

bool Kernel::quiescent()
{
    return runnable().empty();
}

bool Kernel::step()
{
    const auto ready = runnable();
    if (ready.empty())
        return false;
    auto next = ready.front();
    if (last_) {
        const auto it = std::upper_bound(ready.begin(), ready.end(), *last_);
        if (it != ready.end())
            next = *it;
    }
    last_ = next;
    trace_.set_step(++steps_);

    auto& proc = *processes_.find(Pid{next.first});
    if (proc.threads[next.second].is_driver())
        scm_.drive();
    else
        execute(proc, proc.threads[next.second]);
    return true;
}

RunSummary Kernel::run(std::uint64_t limit)
{
    RunSummary summary;
    while (summary.steps < limit && step())
        ++summary.steps;
    summary.quiescent = quiescent();
    if (!summary.quiescent)
        summary.timeouts = pending_work();
    summary.trace_length = trace_.size();
    return summary;
}

std::vector<std::string> Kernel::pending_work()
{
    std::vector<std::string> out;
    for (const auto& [pid, tid] : runnable()) {
        const auto& proc = *processes_.find(Pid{pid});
        const auto& t = proc.threads[tid];
        std::string line = "timeout pid=" + std::to_string(pid) + " tid=" + std::to_string(tid);
        if (t.is_driver()) {
            out.push_back(line + " scm start transaction pending");
            continue;
        }
        const auto& a = t.image->script[t.cursor];
        line += " service=" + (t.service.empty() ? std::string("-") : t.service) + " next=" + std::string(action_tag(a));
        if (const auto* w = std::get_if<action::WaitForService>(&a))
            line += " waiting-for=" + monitor_.intercept(proc.placement, {SyscallOp::WaitService, {}, w->name}).arg;
        out.push_back(line);
    }
    return out;
}

std::string Kernel::dispatch(Pid pid, const std::string& self, const SyscallRequest& request)
{
    auto* proc = processes_.find(pid);
    if (proc == nullptr)
        throw Error(ErrorCode::UnknownProcess, "unknown pid " + std::to_string(pid.value));
    const auto where = proc->placement;
    const auto x = monitor_.intercept(where, request);
    const auto mark = trace_.size();

    std::string result = "ok";
    try {
        switch (request.op) {
        case SyscallOp::CreateObject: {
            const auto h = objects_.create_effective(pid, where, request.kind, ObjectName::parse(x.arg));
            proc->handles.insert_or_assign(request.arg, HeldObject{h, request.kind});
            break;
        }
        case SyscallOp::OpenObject: {
            const auto h = objects_.open_effective(request.kind, ObjectName::parse(x.arg));
            proc->handles.insert_or_assign(request.arg, HeldObject{h, request.kind});
            break;
        }
        case SyscallOp::DeleteObject: {
            ObjectName::parse(x.arg);
            const auto it = proc->handles.find(request.arg);
            if (it == proc->handles.end())
                throw Error(ErrorCode::StaleHandle, "no handle to " + request.arg);
            const auto h = it->second.handle;
            proc->handles.erase(it);
            objects_.delete_object(h);
            break;
        }
        case SyscallOp::ConnectPipe: {
            const auto h = objects_.open_effective(ObjectKind::NamedPipe, ObjectName::parse(x.arg));
            proc->handles.insert_or_assign(request.arg, HeldObject{h, ObjectKind::NamedPipe});
            if (!self.empty())
                scm_.control_pipe_connected(self);
            break;
        }
        case SyscallOp::OpenService:
            scm_.open_service(where, x.arg);
            break;
        case SyscallOp::RegisterHandler:
            scm_.register_ctrl_handler(pid, x.arg, self);
            break;
        case SyscallOp::StringApi:
            break;
        case SyscallOp::WaitService:
            if (!scm_.status(x.arg).is(ServiceStatus::State::Running))
                throw Error(ErrorCode::NotFound, x.arg + " is not running");
            break;
        }
    } catch (const Error& e) {
        result = std::string(to_string(e.code()));
    }
    trace_.insert(mark, pid, where, op_tag(request), request.arg, x.arg, result);
    return result;
}

bool Kernel::service_starting(const std::string& self) const
{
    if (self.empty())
        return false;
    const auto* rec = scm_.find(self);
    return rec != nullptr && scm_.status(self).is(ServiceStatus::State::StartPending);
}

void Kernel::fail_starting(const std::string& self, const std::string& reason)
{
    if (service_starting(self))
        scm_.fail_service(self, reason);
}

void Kernel::execute(Process& proc, Thread& thread)
{
    const Pid pid = proc.pid;
    const auto tid = thread.tid;
    const std::string self = thread.service;
    const auto& a = thread.image->script[thread.cursor];
    bool advance = true;

    // Service lifecycle calls made by the script itself.
    const auto lifecycle = [&](std::string_view op, auto&& call) {
        const auto mark = trace_.size();
        std::string result = "ok";
        if (self.empty()) {
            result = std::string(to_string(ErrorCode::UnknownService));
        } else {
            try {
                call();
            } catch (const Error& e) {
                result = std::string(to_string(e.code()));
            }
        }
        trace_.insert(mark, pid, proc.placement, std::string(op), self, self, result);
    };

    if (std::holds_alternative<action::ConnectControlPipe>(a)) {
        const auto pipe = scm_.control_pipe_of(self).value_or(std::string(ServiceControlManager::kControlPipePrefix));
        if (dispatch(pid, self, {SyscallOp::ConnectPipe, ObjectKind::NamedPipe, pipe}) != "ok")
            fail_starting(self, "control-pipe");
    } else if (const auto* r = std::get_if<action::RegisterCtrlHandler>(&a)) {
        const auto res = dispatch(pid, self, {SyscallOp::RegisterHandler, {}, r->name.resolve(self)});
        if (res != "ok")
            fail_starting(self, res);
    } else if (const auto* o = std::get_if<action::OpenService>(&a)) {
        const auto res = dispatch(pid, self, {SyscallOp::OpenService, {}, o->name.resolve(self)});
        if (res != "ok")
            fail_starting(self, res == to_string(ErrorCode::AccessRefused) ? "name-conflict" : res);
    } else if (const auto* s = std::get_if<action::StringApiUse>(&a)) {
        dispatch(pid, self, {SyscallOp::StringApi, {}, s->name.resolve(self)});
    } else if (const auto* c = std::get_if<action::CreateObject>(&a)) {
        const auto res = dispatch(pid, self, {SyscallOp::CreateObject, c->kind, c->name});
        if (res != "ok" && c->fatal)
            fail_starting(self, res);
    } else if (const auto* op = std::get_if<action::OpenObject>(&a)) {
        const auto res = dispatch(pid, self, {SyscallOp::OpenObject, op->kind, op->name});
        if (res != "ok" && op->fatal)
            fail_starting(self, res);
    } else if (const auto* d = std::get_if<action::DeleteObject>(&a)) {
        const auto held = proc.handles.find(d->name);
        const auto kind = held == proc.handles.end() ? ObjectKind::Port : held->second.kind;
        dispatch(pid, self, {SyscallOp::DeleteObject, kind, d->name});
    } else if (const auto* w = std::get_if<action::WaitForService>(&a)) {
        const auto target = monitor_.intercept(proc.placement, {SyscallOp::WaitService, {}, w->name}).arg;
        if (scm_.find(target) != nullptr && !scm_.status(target).is(ServiceStatus::State::Running)) {
            advance = false;  // blocked; retried on the thread's next turn
        } else {
            const auto res = dispatch(pid, self, {SyscallOp::WaitService, {}, w->name});
            if (res != "ok")
                fail_starting(self, res);
        }
    } else if (std::holds_alternative<action::SignalRunning>(a)) {
        lifecycle("signal-running", [&] { scm_.signal_running(self); });
    } else if (const auto* sl = std::get_if<action::Sleep>(&a)) {
        if (!thread.sleeping) {
            thread.sleeping = true;
            thread.sleep_left = sl->steps;
        }
        if (thread.sleep_left > 0)
            --thread.sleep_left;
        advance = thread.sleep_left == 0;
        if (advance)
            thread.sleeping = false;
    } else if (std::holds_alternative<action::Stop>(a)) {
        lifecycle("stop", [&] { scm_.stop_service(self); });
    } else if (const auto* f = std::get_if<action::Fail>(&a)) {
        lifecycle("fail", [&] {
            if (!service_starting(self) && !scm_.status(self).is(ServiceStatus::State::Running))
                throw Error(ErrorCode::HandshakeIncomplete, self + " is not active");
            scm_.fail_service(self, f->reason);
        });
    }

    auto& t = processes_.find(pid)->threads[tid];
    if (t.retired)
        return;
    if (advance)
        ++t.cursor;
    if (t.cursor < t.image->script.size())
        return;
    if (self.empty())
        processes_.finish_core_thread(pid, tid);
    else
        fail_starting(self, "exited");
}

} // namespace svcvirt
