#pragma once

#include "svcvirt/object_namespace.hpp"
#include "svcvirt/registry.hpp"
#include "svcvirt/service_record.hpp"
#include "svcvirt/text.hpp"
#include "svcvirt/trace.hpp"

#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace svcvirt {

struct ServiceStatus {
    enum class State { Registered, StartPending, Running, Stopped, Failed };

    State state = State::Registered;
    std::string reason;  // Failed only

    static ServiceStatus failed(std::string reason) { return {State::Failed, std::move(reason)}; }

    bool is(State s) const { return state == s; }
    // `Running`, `Failed(name-conflict)`, ...
    std::string str() const;
    bool operator==(const ServiceStatus&) const = default;
};

// Process-side half of starting a service, implemented by the process table.
class ServiceLauncher {
public:
    virtual ~ServiceLauncher() = default;

    // EXE services get a fresh process; DLL services become a new thread of
    // their group's svchost process, which is spawned first if absent.
    virtual Pid launch_service(const ServiceRecord& record) = 0;
    // The service's thread is done; its process exits once nothing else lives in it.
    virtual void retire_service(Pid pid, std::string_view service) = 0;
    virtual Placement placement_of(Pid pid) const = 0;
};

struct ServiceHandle {
    std::string name;
};

struct StopResult {
    ServiceStatus status;
    std::vector<std::string> running_dependents;
};

class ServiceControlManager {
public:
    static constexpr std::string_view kControlPipePrefix = "\\Device\\NamedPipe\\net\\NtControlPipe";

    ServiceControlManager(Registry& registry, ObjectNamespace& objects, ServiceLauncher& launcher, Trace& trace);

    void set_scm_pid(Pid pid) { scm_pid_ = pid; }
    Pid scm_pid() const { return scm_pid_; }

    // Boot-time snapshot of the Services key and SvcHost groups. Later
    // registry edits that bypass create_service stay invisible.
    void load_database();

    void create_service(const ServiceRecord& record);
    const ServiceRecord* find(std::string_view name) const;
    std::vector<const ServiceRecord*> records() const;
    std::vector<std::string> group_members(std::string_view group) const;

    ServiceHandle open_service(const Placement& caller, std::string_view name) const;

    // Dependencies first; ties broken by case-insensitive base name.
    std::vector<std::string> compute_start_order(std::span<const std::string> roots) const;

    ServiceStatus start_service(std::string_view name);
    // Starts every Auto service in one boot transaction; a failure only
    // takes down the services that depend on it.
    void start_auto_services();
    StopResult stop_service(std::string_view name);

    void control_pipe_connected(std::string_view service);
    // `caller_service` is the service whose thread made the call; it is the
    // one that fails when the claimed name does not match.
    void register_ctrl_handler(Pid proc, std::string_view claimed, std::string_view caller_service = {});
    void signal_running(std::string_view service);
    void fail_service(std::string_view service, const std::string& reason);

    ServiceStatus status(std::string_view name) const;
    std::optional<std::string> control_pipe_of(std::string_view service) const;
    std::optional<Pid> process_of(std::string_view service) const;

    // The SCM's own driver thread: true while some start transaction can make
    // progress; drive() performs exactly one launch or abort.
    bool has_work();
    void drive();

    // `<name> <kind> <group|-> <status> vm=<id|host>` per service, sorted by name.
    std::string status_report() const;

private:
    struct Runtime {
        ServiceStatus status;
        ServiceStatus before_start;
        std::optional<Pid> pid;
        std::optional<ObjectHandle> pipe;
        std::string pipe_name;
        bool launched = false;
        bool pipe_connected = false;
        bool handler_registered = false;
    };

    struct Transaction {
        std::vector<std::string> order;
        std::size_t next = 0;
        bool abort_on_failure = true;
    };

    const ServiceRecord& record(std::string_view name) const;
    Runtime& runtime(std::string_view name);
    const Runtime* runtime_if(std::string_view name) const;
    std::vector<std::string> dependencies_of(const ServiceRecord& rec) const;
    bool depends_on(std::string_view service, std::string_view dependency) const;
    void set_status(std::string_view name, ServiceStatus status);
    void release(std::string_view name);
    void open_transaction(const std::vector<std::string>& order, bool abort_on_failure);
    void normalize();
    void launch(std::string_view name);
    void handle_failure(Transaction& txn);

    Registry& registry_;
    ObjectNamespace& objects_;
    ServiceLauncher& launcher_;
    Trace& trace_;
    Pid scm_pid_{0};

    std::map<std::string, ServiceRecord, CaseInsensitiveLess> db_;
    std::map<std::string, std::vector<std::string>, CaseInsensitiveLess> groups_;
    std::map<std::string, Runtime, CaseInsensitiveLess> runtime_;
    std::deque<Transaction> transactions_;
    std::uint64_t pipe_counter_ = 0;
};

} // namespace svcvirt
