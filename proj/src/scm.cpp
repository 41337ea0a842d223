#include "svcvirt/scm.hpp"

#include "svcvirt/error.hpp"
#include "svcvirt/service_name.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace svcvirt {

std::string ServiceStatus::str() const
{
    switch (state) {
    case State::Registered: return "Registered";
    case State::StartPending: return "StartPending";
    case State::Running: return "Running";
    case State::Stopped: return "Stopped";
    case State::Failed: return "Failed(" + reason + ")";
    }
    return "?";
}

ServiceControlManager::ServiceControlManager(Registry& registry, ObjectNamespace& objects, ServiceLauncher& launcher,
                                             Trace& trace)
    : registry_(registry), objects_(objects), launcher_(launcher), trace_(trace)
{
}

void ServiceControlManager::load_database()
{
    db_.clear();
    groups_.clear();
    runtime_.clear();
    transactions_.clear();

    if (const auto services = registry_.open_key(RegistryPath::parse(kServicesKey))) {
        for (const auto& name : registry_.subkeys(*services)) {
            auto rec = read_service_record(registry_, name);
            runtime_[rec.name] = Runtime{};
            db_.emplace(rec.name, std::move(rec));
        }
    }
    if (const auto svchost = registry_.open_key(RegistryPath::parse(kSvcHostKey))) {
        for (const auto& value : registry_.values(*svchost)) {
            if (const auto* members = std::get_if<StringList>(&value.payload))
                groups_[value.name] = *members;
        }
    }
}

void ServiceControlManager::create_service(const ServiceRecord& rec)
{
    rec.validate();
    if (db_.contains(rec.name))
        throw Error(ErrorCode::ServiceExists, "service already exists: " + rec.name);

    write_service_record(registry_, rec);
    if (const auto* group = rec.group()) {
        const auto key = registry_.create_key(RegistryPath::parse(kSvcHostKey));
        StringList members;
        if (const auto existing = registry_.get_value(key, *group)) {
            if (const auto* list = std::get_if<StringList>(&existing->payload))
                members = *list;
        }
        members.push_back(rec.name);
        registry_.set_value(key, {*group, members});
        groups_[*group] = members;
    }
    db_.emplace(rec.name, rec);
    runtime_[rec.name] = Runtime{};
    trace_.append(scm_pid_, Placement::host(), "create-service", rec.name, rec.name);
}

const ServiceRecord* ServiceControlManager::find(std::string_view name) const
{
    const auto it = db_.find(name);
    return it == db_.end() ? nullptr : &it->second;
}

const ServiceRecord& ServiceControlManager::record(std::string_view name) const
{
    if (const auto* rec = find(name))
        return *rec;
    throw Error(ErrorCode::UnknownService, "unknown service: " + std::string(name));
}

std::vector<const ServiceRecord*> ServiceControlManager::records() const
{
    std::vector<const ServiceRecord*> out;
    for (const auto& [_, rec] : db_)
        out.push_back(&rec);
    return out;
}

std::vector<std::string> ServiceControlManager::group_members(std::string_view group) const
{
    const auto it = groups_.find(group);
    return it == groups_.end() ? std::vector<std::string>{} : it->second;
}

ServiceControlManager::Runtime& ServiceControlManager::runtime(std::string_view name)
{
    return runtime_.at(record(name).name);
}

const ServiceControlManager::Runtime* ServiceControlManager::runtime_if(std::string_view name) const
{
    const auto it = runtime_.find(name);
    return it == runtime_.end() ? nullptr : &it->second;
}

ServiceHandle ServiceControlManager::open_service(const Placement& caller, std::string_view name) const
{
    const auto& rec = record(name);
    const auto* rt = runtime_if(rec.name);
    if (rt != nullptr && rt->status.is(ServiceStatus::State::Running) && rec.owner() != caller) {
        throw Error(ErrorCode::AccessRefused,
                    "service " + rec.name + " is running in " + rec.owner().str() + ", caller is in " + caller.str());
    }
    return ServiceHandle{rec.name};
}

std::vector<std::string> ServiceControlManager::dependencies_of(const ServiceRecord& rec) const
{
    std::vector<std::string> deps;
    for (const auto& dep : rec.depends_on_services) {
        const auto* d = find(dep);
        if (d == nullptr)
            throw Error(ErrorCode::UnknownService, "unknown dependency " + dep + " of " + rec.name);
        deps.push_back(d->name);
    }
    for (const auto& group : rec.depends_on_groups) {
        for (const auto& [name, other] : db_) {
            if (const auto* g = other.group(); g != nullptr && iequals(*g, group))
                deps.push_back(name);
        }
    }
    return deps;
}

bool ServiceControlManager::depends_on(std::string_view service, std::string_view dependency) const
{
    std::set<std::string, CaseInsensitiveLess> seen;
    std::vector<std::string> work{std::string(service)};
    while (!work.empty()) {
        const auto cur = work.back();
        work.pop_back();
        const auto* rec = find(cur);
        if (rec == nullptr)
            continue;
        for (const auto& dep : rec->depends_on_services) {
            if (iequals(dep, dependency))
                return true;
            if (seen.insert(dep).second)
                work.push_back(dep);
        }
        for (const auto& group : rec->depends_on_groups) {
            for (const auto& [name, other] : db_) {
                const auto* g = other.group();
                if (g == nullptr || !iequals(*g, group))
                    continue;
                if (iequals(name, dependency))
                    return true;
                if (seen.insert(name).second)
                    work.push_back(name);
            }
        }
    }
    return false;
}

std::vector<std::string> ServiceControlManager::compute_start_order(std::span<const std::string> roots) const
{
    enum class Mark { Visiting, Done };
    std::map<std::string, Mark, CaseInsensitiveLess> marks;
    std::map<std::string, std::vector<std::string>, CaseInsensitiveLess> edges;
    std::vector<std::string> path;

    std::function<void(const std::string&)> visit = [&](const std::string& name) {
        const auto& rec = record(name);
        marks[rec.name] = Mark::Visiting;
        path.push_back(rec.name);
        auto deps = dependencies_of(rec);
        for (const auto& dep : deps) {
            const auto it = marks.find(dep);
            if (it == marks.end()) {
                visit(dep);
            } else if (it->second == Mark::Visiting) {
                auto from = std::find_if(path.begin(), path.end(), [&](const auto& p) { return iequals(p, dep); });
                std::vector<std::string> cycle(from, path.end());
                cycle.push_back(dep);
                throw Error(ErrorCode::DependencyCycle, "dependency cycle: " + join(cycle, " -> "));
            }
        }
        edges[rec.name] = std::move(deps);
        marks[rec.name] = Mark::Done;
        path.pop_back();
    };
    for (const auto& root : roots) {
        const auto& rec = record(root);
        if (!marks.contains(rec.name))
            visit(rec.name);
    }

    // Kahn's algorithm; the ready set is ordered by (base name, full name).
    using Key = std::pair<std::string, std::string>;
    const auto key_of = [](const std::string& name) { return Key{to_lower(base_name(name)), to_lower(name)}; };
    std::map<std::string, std::size_t, CaseInsensitiveLess> pending;
    std::map<std::string, std::vector<std::string>, CaseInsensitiveLess> dependents;
    for (const auto& [name, deps] : edges) {
        std::set<std::string, CaseInsensitiveLess> unique(deps.begin(), deps.end());
        pending[name] = unique.size();
        for (const auto& dep : unique)
            dependents[dep].push_back(name);
    }
    std::map<Key, std::string> ready;
    for (const auto& [name, count] : pending) {
        if (count == 0)
            ready.emplace(key_of(name), name);
    }
    std::vector<std::string> order;
    while (!ready.empty()) {
        const auto name = ready.begin()->second;
        ready.erase(ready.begin());
        order.push_back(name);
        for (const auto& dependent : dependents[name]) {
            if (--pending[dependent] == 0)
                ready.emplace(key_of(dependent), dependent);
        }
    }
    return order;
}

void ServiceControlManager::set_status(std::string_view name, ServiceStatus status)
{
    auto& rt = runtime(name);
    rt.status = std::move(status);
    const auto& canonical = record(name).name;
    trace_.append(scm_pid_, Placement::host(), "status:" + rt.status.str(), canonical, canonical);
}

void ServiceControlManager::open_transaction(const std::vector<std::string>& order, bool abort_on_failure)
{
    for (const auto& name : order) {
        auto& rt = runtime(name);
        if (rt.status.is(ServiceStatus::State::Running) || rt.status.is(ServiceStatus::State::StartPending))
            continue;
        rt.before_start = rt.status;
        rt.launched = false;
        rt.pipe_connected = false;
        rt.handler_registered = false;
        set_status(name, {ServiceStatus::State::StartPending, {}});
    }
    transactions_.push_back(Transaction{order, 0, abort_on_failure});
}

ServiceStatus ServiceControlManager::start_service(std::string_view name)
{
    const auto& rec = record(name);
    const auto& rt = runtime(rec.name);
    if (rt.status.is(ServiceStatus::State::Running) || rt.status.is(ServiceStatus::State::StartPending))
        return rt.status;
    const std::string root = rec.name;
    open_transaction(compute_start_order(std::span<const std::string>(&root, 1)), true);
    return runtime(root).status;
}

void ServiceControlManager::start_auto_services()
{
    std::vector<std::string> roots;
    for (const auto& [name, rec] : db_) {
        if (rec.start_type == StartType::Auto)
            roots.push_back(name);
    }
    if (!roots.empty())
        open_transaction(compute_start_order(roots), false);
}

void ServiceControlManager::release(std::string_view name)
{
    auto& rt = runtime(name);
    if (rt.pipe) {
        const auto pipe = *rt.pipe;
        rt.pipe.reset();
        objects_.delete_object(pipe);
        trace_.append(scm_pid_, Placement::host(), "delete-object", rt.pipe_name, rt.pipe_name);
    }
    if (rt.pid) {
        const auto pid = *rt.pid;
        rt.pid.reset();
        launcher_.retire_service(pid, record(name).name);
    }
    rt.pipe_connected = false;
    rt.handler_registered = false;
}

StopResult ServiceControlManager::stop_service(std::string_view name)
{
    const auto& rec = record(name);
    auto& rt = runtime(rec.name);
    StopResult result;
    if (rt.status.is(ServiceStatus::State::Running) || rt.status.is(ServiceStatus::State::StartPending)) {
        set_status(rec.name, {ServiceStatus::State::Stopped, {}});
        release(rec.name);
    }
    result.status = rt.status;
    for (const auto& [other, other_rt] : runtime_) {
        if (other_rt.status.is(ServiceStatus::State::Running) && depends_on(other, rec.name))
            result.running_dependents.push_back(other);
    }
    return result;
}

void ServiceControlManager::fail_service(std::string_view service, const std::string& reason)
{
    auto& rt = runtime(service);
    if (!rt.status.is(ServiceStatus::State::Running) && !rt.status.is(ServiceStatus::State::StartPending))
        return;
    set_status(service, ServiceStatus::failed(reason));
    release(service);
}

void ServiceControlManager::control_pipe_connected(std::string_view service)
{
    auto& rt = runtime(service);
    if (rt.status.is(ServiceStatus::State::StartPending))
        rt.pipe_connected = true;
}

void ServiceControlManager::register_ctrl_handler(Pid proc, std::string_view claimed, std::string_view caller_service)
{
    const auto hosted_starting = [&](const std::string& name) {
        const auto* rt = runtime_if(name);
        return rt != nullptr && rt->status.is(ServiceStatus::State::StartPending) && rt->pid == proc;
    };

    if (const auto* target = find(claimed); target != nullptr && hosted_starting(target->name)) {
        auto& rt = runtime(target->name);
        if (!rt.pipe_connected) {
            fail_service(target->name, "handshake-incomplete");
            throw Error(ErrorCode::HandshakeIncomplete, target->name + " registered before connecting its control pipe");
        }
        rt.handler_registered = true;
        return;
    }

    std::optional<std::string> victim;
    if (!caller_service.empty() && find(caller_service) != nullptr && hosted_starting(record(caller_service).name)) {
        victim = record(caller_service).name;
    } else {
        std::vector<std::string> starting;
        for (const auto& [name, _] : runtime_) {
            if (hosted_starting(name))
                starting.push_back(name);
        }
        if (starting.size() == 1)
            victim = starting.front();
    }
    if (victim)
        fail_service(*victim, "name-conflict");
    throw Error(ErrorCode::NameMismatch, "pid " + std::to_string(proc.value) + " hosts no starting service named " +
                                             std::string(claimed));
}

void ServiceControlManager::signal_running(std::string_view service)
{
    auto& rt = runtime(service);
    if (!rt.status.is(ServiceStatus::State::StartPending))
        throw Error(ErrorCode::HandshakeIncomplete, std::string(service) + " is not starting");
    if (!rt.pipe_connected || !rt.handler_registered) {
        fail_service(service, "handshake-incomplete");
        throw Error(ErrorCode::HandshakeIncomplete, std::string(service) + " signalled before completing its handshake");
    }
    set_status(service, {ServiceStatus::State::Running, {}});
}

ServiceStatus ServiceControlManager::status(std::string_view name) const
{
    const auto& rec = record(name);
    return runtime_.at(rec.name).status;
}

std::optional<std::string> ServiceControlManager::control_pipe_of(std::string_view service) const
{
    const auto* rec = find(service);
    if (rec == nullptr)
        return std::nullopt;
    const auto& rt = runtime_.at(rec->name);
    if (!rt.pipe)
        return std::nullopt;
    return rt.pipe_name;
}

std::optional<Pid> ServiceControlManager::process_of(std::string_view service) const
{
    const auto* rec = find(service);
    return rec == nullptr ? std::nullopt : runtime_.at(rec->name).pid;
}

void ServiceControlManager::normalize()
{
    for (auto& txn : transactions_) {
        while (txn.next < txn.order.size() && runtime(txn.order[txn.next]).status.is(ServiceStatus::State::Running))
            ++txn.next;
    }
    std::erase_if(transactions_, [](const Transaction& t) { return t.next >= t.order.size(); });
}

bool ServiceControlManager::has_work()
{
    normalize();
    return std::any_of(transactions_.begin(), transactions_.end(), [&](const Transaction& t) {
        const auto& rt = runtime(t.order[t.next]);
        return !(rt.status.is(ServiceStatus::State::StartPending) && rt.launched);
    });
}

void ServiceControlManager::drive()
{
    normalize();
    for (auto& txn : transactions_) {
        const auto name = txn.order[txn.next];
        const auto& rt = runtime(name);
        if (rt.status.is(ServiceStatus::State::StartPending)) {
            if (rt.launched)
                continue;
            launch(name);
        } else {
            handle_failure(txn);
        }
        normalize();
        return;
    }
}

void ServiceControlManager::launch(std::string_view name)
{
    const auto& rec = record(name);
    auto& rt = runtime(rec.name);
    rt.launched = true;

    rt.pipe_name = std::string(kControlPipePrefix) + std::to_string(++pipe_counter_);
    try {
        rt.pipe = objects_.create_effective(scm_pid_, Placement::host(), ObjectKind::NamedPipe,
                                            ObjectName::parse(rt.pipe_name));
        trace_.append(scm_pid_, Placement::host(), "create-object:NamedPipe", rt.pipe_name, rt.pipe_name);
    } catch (const Error& e) {
        trace_.append(scm_pid_, Placement::host(), "create-object:NamedPipe", rt.pipe_name, rt.pipe_name,
                      std::string(to_string(e.code())));
        fail_service(rec.name, "control-pipe");
        return;
    }

    if (const auto* group = rec.group()) {
        const auto members = group_members(*group);
        if (std::none_of(members.begin(), members.end(), [&](const auto& m) { return iequals(m, rec.name); })) {
            fail_service(rec.name, "not-in-group");
            return;
        }
    }

    try {
        rt.pid = launcher_.launch_service(rec);
    } catch (const Error& e) {
        fail_service(rec.name, std::string(to_string(e.code())));
    }
}

void ServiceControlManager::handle_failure(Transaction& txn)
{
    const auto failed = txn.order[txn.next];
    txn.order.erase(txn.order.begin() + static_cast<std::ptrdiff_t>(txn.next));

    const auto unlaunched = [&](const std::string& name) {
        const auto& rt = runtime(name);
        return rt.status.is(ServiceStatus::State::StartPending) && !rt.launched;
    };
    for (auto it = txn.order.begin() + static_cast<std::ptrdiff_t>(txn.next); it != txn.order.end();) {
        if (unlaunched(*it) && depends_on(*it, failed)) {
            set_status(*it, ServiceStatus::failed("dependency"));
            it = txn.order.erase(it);
        } else {
            ++it;
        }
    }
    if (!txn.abort_on_failure)
        return;
    for (auto i = txn.next; i < txn.order.size(); ++i) {
        if (unlaunched(txn.order[i]))
            set_status(txn.order[i], runtime(txn.order[i]).before_start);
    }
    txn.order.resize(txn.next);
}

std::string ServiceControlManager::status_report() const
{
    std::ostringstream os;
    for (const auto& [name, rec] : db_) {
        const auto* group = rec.group();
        os << name << ' ' << (rec.is_dll() ? "DLL" : "EXE") << ' ' << (group ? *group : "-") << ' '
           << runtime_.at(name).status.str() << " vm=" << rec.owner().str() << '\n';
    }
    return os.str();
}

} // namespace svcvirt
