#pragma once

#include "svcvirt/exemptions.hpp"
#include "svcvirt/image.hpp"
#include "svcvirt/monitor.hpp"
#include "svcvirt/object_namespace.hpp"
#include "svcvirt/process.hpp"
#include "svcvirt/registry.hpp"
#include "svcvirt/rewrite_table.hpp"
#include "svcvirt/scm.hpp"
#include "svcvirt/trace.hpp"
#include "svcvirt/virtualizer.hpp"
#include "svcvirt/vm_table.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace svcvirt {

struct RunSummary {
    std::uint64_t steps = 0;  // taken by this run
    bool quiescent = false;
    std::size_t trace_length = 0;
    // One line per thread still holding work when the limit was hit.
    std::vector<std::string> timeouts;
};

// Owns one simulated machine: registry, object namespace, SCM, processes,
// the monitor and the virtualizer, plus the scheduler that steps scripts.
class Kernel {
public:
    explicit Kernel(ExemptionList exemptions);
    Kernel(const Kernel&) = delete;
    Kernel& operator=(const Kernel&) = delete;

    Registry& registry() { return registry_; }
    VmTable& vms() { return vms_; }
    ObjectNamespace& objects() { return objects_; }
    ImageStore& images() { return images_; }
    NameRewriteTable& rewrites() { return rewrites_; }
    Monitor& monitor() { return monitor_; }
    ProcessTable& processes() { return processes_; }
    ServiceControlManager& scm() { return scm_; }
    Virtualizer& virtualizer() { return virtualizer_; }
    Trace& trace() { return trace_; }
    const Trace& trace() const { return trace_; }

    void set_name_rewrite(bool on) { monitor_.set_name_rewrite(on); }

    // Spawns the SCM and the core processes, snapshots the service database
    // and queues every Auto service.
    void boot(const std::vector<std::string>& core_images);
    VmId create_vm() { return vms_.create(); }

    // Runs one action of the next thread in round-robin order. False when
    // nothing is left to run.
    bool step();
    RunSummary run(std::uint64_t limit);
    std::uint64_t steps() const { return steps_; }
    bool quiescent();

    // Intercepts, executes and traces one request made by `pid` on behalf
    // of `self` (the service whose thread issued it; empty for core code).
    // Returns `ok` or the error code.
    std::string dispatch(Pid pid, const std::string& self, const SyscallRequest& request);

    std::vector<std::string> pending_work();

private:
    using ThreadKey = std::pair<std::uint32_t, std::uint32_t>;

    std::vector<ThreadKey> runnable();
    void execute(Process& proc, Thread& thread);
    bool service_starting(const std::string& self) const;
    void fail_starting(const std::string& self, const std::string& reason);

    VmTable vms_;
    Registry registry_;
    ObjectNamespace objects_;
    Trace trace_;
    ImageStore images_;
    NameRewriteTable rewrites_;
    Monitor monitor_;
    ProcessTable processes_;
    ServiceControlManager scm_;
    Virtualizer virtualizer_;

    std::uint64_t steps_ = 0;
    std::optional<ThreadKey> last_;
};

} // namespace svcvirt
