#include "support.hpp"
#include "common/generators.hpp"

#include "svcvirt/monitor.hpp"
#include "svcvirt/rewrite_table.hpp"
#include "svcvirt/workspace.hpp"

#include <set>

using namespace svcvirt;

namespace {

Placement classify(const VmTable& vms, std::string_view path, std::vector<std::string> params)
{
    return classify_process(vms, path, params);
}

struct MonitorFixture {
    VmTable vms;
    ObjectNamespace ns{vms, ExemptionList::defaults()};
    NameRewriteTable rewrites;
    Monitor monitor{ns, rewrites};
    MonitorFixture()
    {
        vms.create();
        vms.create();
        rewrites.add(VmId{2}, "RpcSs", "RpcSs-vm2");
    }
};

} // namespace

TEST_SUITE("monitor") {

TEST_CASE("VM ids count up from 1 and are never reused")
{
    VmTable vms;
    CHECK(vms.create() == VmId{1});
    CHECK(vms.create() == VmId{2});
    vms.destroy(VmId{2});
    CHECK(vms.create() == VmId{3});
    CHECK_FALSE(vms.is_live(VmId{2}));
    CHECK(vms.live() == std::vector<VmId>{VmId{1}, VmId{3}});
    CHECK(Placement::in_vm(VmId{1}) != Placement::host());
    CHECK(Placement::host().str() == "host");
}

TEST_CASE("remap_file_path")
{
    CHECK(remap_file_path("c:\\WINNT\\system32\\inetsrv\\inetinfo.exe", VmId{4}) ==
          "c:\\fvms\\VM-4\\C\\WINNT\\system32\\inetsrv\\inetinfo.exe");
    CHECK(remap_file_path("d:\\data\\a.mdb", VmId{2}) == "c:\\fvms\\VM-2\\D\\data\\a.mdb");
    CHECK(remap_file_path("c:\\fvms\\VM-2\\D\\data\\a.mdb", VmId{2}) == "c:\\fvms\\VM-2\\D\\data\\a.mdb");
    // Another VM's workspace is just a path on drive C.
    CHECK(remap_file_path("c:\\fvms\\VM-1\\C\\x.exe", VmId{2}) == "c:\\fvms\\VM-2\\C\\fvms\\VM-1\\C\\x.exe");
    CHECK_ERROR_CODE(remap_file_path("WINNT\\system32\\x.exe", VmId{1}), ErrorCode::RelativePath);
    CHECK_ERROR_CODE(remap_file_path("c:x.exe", VmId{1}), ErrorCode::RelativePath);
}

TEST_CASE("remap is idempotent")
{
    std::mt19937 rng(41);
    for (int i = 0; i < 500; ++i) {
        VmId vm{std::uint32_t(1 + rng() % 20)};
        auto once = remap_file_path(gen::drive_path(rng), vm);
        CHECK(remap_file_path(once, vm) == once);
        CHECK(workspace_vm(once) == vm);
    }
}

TEST_CASE("classify_process")
{
    VmTable vms;
    for (int i = 0; i < 5; ++i)
        vms.create();
    CHECK(classify(vms, "c:\\WINNT\\system32\\svchost.exe", {"-k", "rpcss-vm5"}) == Placement::in_vm(VmId{5}));
    CHECK(classify(vms, "c:\\fvms\\VM-3\\C\\WINNT\\system32\\inetsrv\\inetinfo.exe", {}) ==
          Placement::in_vm(VmId{3}));
    CHECK(classify(vms, "c:\\WINNT\\system32\\services.exe", {}) == Placement::host());
    // Only the last -vm tag counts.
    CHECK(classify(vms, "c:\\WINNT\\system32\\svchost.exe", {"-k", "web-vm9-vm2"}) == Placement::in_vm(VmId{2}));
    CHECK(classify(vms, "c:\\WINNT\\system32\\svchost.exe", {"-k", "netsvcs"}) == Placement::host());

    CHECK_ERROR_CODE(classify(vms, "c:\\fvms\\VM-3\\C\\svchost.exe", {"-k", "rpcss-vm1"}),
                     ErrorCode::ClassificationConflict);
    CHECK_ERROR_CODE(classify(vms, "c:\\WINNT\\system32\\svchost.exe", {"-k", "rpcss-vm8"}), ErrorCode::UnknownVm);
    CHECK_ERROR_CODE(classify(vms, "c:\\fvms\\VM-8\\C\\x.exe", {}), ErrorCode::UnknownVm);
}

TEST_CASE("classification agrees when parameter and path name the same VM")
{
    VmTable vms;
    for (int i = 0; i < 6; ++i)
        vms.create();
    std::mt19937 rng(43);
    for (int i = 0; i < 300; ++i) {
        VmId vm{std::uint32_t(1 + rng() % 6)};
        auto path = remap_file_path(gen::drive_path(rng), vm);
        std::vector<std::string> params{"-k", gen::ident(rng) + "-vm" + std::to_string(vm.value)};
        CHECK(classify(vms, path, params) == Placement::in_vm(vm));
        // Pure: same answer twice.
        CHECK(classify(vms, path, params) == classify(vms, path, params));
    }
}

TEST_CASE("intercept renames VM object names and leaves exempt ones")
{
    MonitorFixture f;
    auto vm1 = Placement::in_vm(VmId{1});
    auto out = f.monitor.intercept(vm1, {SyscallOp::OpenObject, ObjectKind::Mutex, "\\BaseNamedObjects\\RasPbFile"});
    CHECK(out.arg == "\\BaseNamedObjects\\RasPbFile");
    out = f.monitor.intercept(vm1, {SyscallOp::CreateObject, ObjectKind::Event, "\\BaseNamedObjects\\Work"});
    CHECK(out.arg == "\\BaseNamedObjects\\Work-vm1");
    out = f.monitor.intercept(vm1, {SyscallOp::ConnectPipe, ObjectKind::Port, "\\Device\\NamedPipe\\net\\NtControlPipe3"});
    CHECK(out.arg == "\\Device\\NamedPipe\\net\\NtControlPipe3");
    out = f.monitor.intercept(vm1, {SyscallOp::CreateObject, ObjectKind::File, "d:\\db\\x.mdb"});
    CHECK(out.arg == "c:\\fvms\\VM-1\\D\\db\\x.mdb");
    // Unparseable names go through as they are.
    out = f.monitor.intercept(vm1, {SyscallOp::OpenObject, ObjectKind::Event, "junk"});
    CHECK(out.arg == "junk");
}

TEST_CASE("intercept rewrites service names for both API classes")
{
    MonitorFixture f;
    auto vm2 = Placement::in_vm(VmId{2});
    CHECK(f.monitor.intercept(vm2, {SyscallOp::OpenService, {}, "RpcSS"}).arg == "RpcSS-vm2");
    CHECK(f.monitor.intercept(vm2, {SyscallOp::StringApi, {}, "RPCSS"}).arg == "RPCSS-vm2");
    CHECK(f.monitor.intercept(vm2, {SyscallOp::RegisterHandler, {}, "rpcss"}).arg == "rpcss-vm2");
    CHECK(f.monitor.intercept(Placement::in_vm(VmId{1}), {SyscallOp::OpenService, {}, "RpcSS"}).arg == "RpcSS");

    f.monitor.set_name_rewrite(false);
    CHECK(f.monitor.intercept(vm2, {SyscallOp::OpenService, {}, "RpcSS"}).arg == "RpcSS");
    // Object renaming does not depend on the rewrite switch.
    CHECK(f.monitor.intercept(vm2, {SyscallOp::CreateObject, ObjectKind::Event, "\\A\\B"}).arg == "\\A\\B-vm2");
}

TEST_CASE("host requests pass through unchanged")
{
    MonitorFixture f;
    std::mt19937 rng(47);
    const SyscallOp ops[] = {SyscallOp::CreateObject, SyscallOp::OpenObject, SyscallOp::DeleteObject,
                             SyscallOp::ConnectPipe,  SyscallOp::OpenService, SyscallOp::RegisterHandler,
                             SyscallOp::StringApi,    SyscallOp::WaitService};
    for (int i = 0; i < 1000; ++i) {
        SyscallRequest r{ops[rng() % std::size(ops)], kAllObjectKinds[rng() % 6],
                         rng() % 2 ? "\\BaseNamedObjects\\" + gen::ident(rng) : std::string("RpcSs")};
        CHECK(f.monitor.intercept(Placement::host(), r) == r);
    }
}

TEST_CASE("rewrite table")
{
    NameRewriteTable t;
    t.add(VmId{2}, "RpcSs", "RpcSs-vm2");
    const auto vm2 = Placement::in_vm(VmId{2});
    CHECK(t.rewrite(vm2, ApiClass::ServiceApi, "RpcSS") == "RpcSS-vm2");
    CHECK(t.rewrite(vm2, ApiClass::StringApi, "RPCSS-vm2") == "RPCSS-vm2");
    CHECK(t.rewrite(vm2, ApiClass::ServiceApi, "Netlogon") == "Netlogon");
    CHECK(t.rewrite(Placement::host(), ApiClass::ServiceApi, "RpcSs") == "RpcSs");
    CHECK(t.lookup(VmId{2}, "rpcss") == std::optional<std::string>("RpcSs-vm2"));
    CHECK_FALSE(t.lookup(VmId{1}, "rpcss"));
}

TEST_CASE("rewrite soundness over random names")
{
    std::mt19937 rng(53);
    NameRewriteTable t;
    auto names = gen::distinct_names(rng, 40);
    for (std::size_t i = 0; i < names.size(); i += 2)
        t.add(VmId{std::uint32_t(1 + i % 3)}, names[i], names[i] + "-vm" + std::to_string(1 + i % 3));
    for (int i = 0; i < 2000; ++i) {
        auto arg = names[rng() % names.size()];
        if (rng() % 3 == 0)
            arg = to_upper(arg);
        if (rng() % 4 == 0)
            arg += "-vm" + std::to_string(1 + rng() % 3);
        auto api = rng() % 2 ? ApiClass::ServiceApi : ApiClass::StringApi;
        auto vm = Placement::in_vm(VmId{std::uint32_t(1 + rng() % 3)});

        CHECK(t.rewrite(Placement::host(), api, arg) == arg);
        auto once = t.rewrite(vm, api, arg);
        CHECK(t.rewrite(vm, api, once) == once);
        if (once != arg) {
            CHECK(once == arg + "-vm" + vm.str());
            CHECK(t.lookup(*vm.vm(), arg));
        }
        if (arg.find("-vm") != std::string::npos)
            CHECK(once == arg);
    }
}

TEST_CASE("op tags")
{
    CHECK(op_tag({SyscallOp::CreateObject, ObjectKind::Section, ""}) == "create-object:Section");
    CHECK(op_tag({SyscallOp::OpenObject, ObjectKind::NamedPipe, ""}) == "open-object:NamedPipe");
    CHECK(op_tag({SyscallOp::ConnectPipe, {}, ""}) == "connect-pipe");
    CHECK(op_tag({SyscallOp::StringApi, {}, ""}) == "string-api");
}

}
