#include "support.hpp"
#include "common/machine.hpp"
#include "common/generators.hpp"

#include "svcvirt/service_name.hpp"
#include "svcvirt/virtualizer.hpp"

using namespace svcvirt;
using testing::MachineSpec;

namespace {

nlohmann::json rpcss_script()
{
    return nlohmann::json::array({
        {{"op", "connect-control-pipe"}},
        {{"op", "string-api-use"}, {"name", {{"hard_coded", "RPCSS"}}}},
        {{"op", "open-service"}, {"name", {{"hard_coded", "RpcSS"}}}},
        {{"op", "register-ctrl-handler"}, {"name", "self"}},
        {{"op", "signal-running"}},
    });
}

} // namespace

TEST_SUITE("virtualizer") {

TEST_CASE("virtualize a shared service")
{
    MachineSpec m;
    m.dll("RpcSs", "rpcss", true);
    auto k = m.boot();
    for (int i = 0; i < 4; ++i)
        k->create_vm();
    CHECK(k->virtualizer().virtualize_service("RpcSs", VmId{4}) == "RpcSs-vm4");
    CHECK(k->registry().key_exists(service_key_path("RpcSs-vm4")));
    auto svchost = *k->registry().open_key(RegistryPath::parse(kSvcHostKey));
    auto members = k->registry().get_value(svchost, "rpcss-vm4");
    REQUIRE(members);
    CHECK(std::get<StringList>(members->payload) == StringList{"RpcSs-vm4"});
    // Nothing is started.
    CHECK(k->scm().status("RpcSs-vm4").str() == "Registered");
    CHECK_ERROR_CODE(k->virtualizer().virtualize_service("RpcSs", VmId{4}), ErrorCode::AlreadyVirtualized);
    CHECK_ERROR_CODE(k->virtualizer().virtualize_service("RpcSs-vm4", VmId{1}), ErrorCode::NotOriginal);
    CHECK_ERROR_CODE(k->virtualizer().virtualize_service("Nothing", VmId{1}), ErrorCode::UnknownService);
    CHECK_ERROR_CODE(k->virtualizer().virtualize_service("RpcSs", VmId{9}), ErrorCode::UnknownVm);
}

TEST_CASE("dependencies are cloned first")
{
    MachineSpec m;
    m.dll("RpcSs", "rpcss", true);
    m.exe("IISADMIN", true, {"RPCSS"});
    auto k = m.boot();
    k->create_vm();
    k->create_vm();
    CHECK(k->virtualizer().virtualize_service("IISADMIN", VmId{2}) == "IISADMIN-vm2");
    const auto* clone = k->scm().find("IISADMIN-vm2");
    REQUIRE(clone);
    CHECK(clone->depends_on_services == std::vector<std::string>{"RPCSS-vm2"});
    CHECK(k->scm().find("RPCSS-vm2"));
    CHECK(clone->image_path() == "c:\\fvms\\VM-2\\C\\svc\\IISADMIN.exe");
    CHECK(k->images().at_path(clone->image_path()));
    CHECK(k->virtualizer().log() == std::vector<std::string>{
                                        "virtualize step=a target=RpcSs vm=2",
                                        "virtualize step=b target=RpcSs vm=2",
                                        "virtualize step=d target=RpcSs vm=2",
                                        "virtualize step=a target=IISADMIN vm=2",
                                        "virtualize step=b target=IISADMIN vm=2",
                                        "virtualize step=c target=IISADMIN vm=2",
                                        "virtualize step=d target=IISADMIN vm=2",
                                    });
    // The dependency clone is in the VM's rewrite table as well.
    CHECK(k->rewrites().lookup(VmId{2}, "rpcss") == std::optional<std::string>("RpcSs-vm2"));
}

TEST_CASE("a cycle is rejected before anything is written")
{
    MachineSpec m;
    m.exe("A", false, {"B"});
    m.exe("B", false, {"A"});
    auto k = m.boot();
    k->create_vm();
    const auto before = k->registry().dump();
    CHECK_ERROR_CODE(k->virtualizer().virtualize_service("A", VmId{1}), ErrorCode::DependencyCycle);
    CHECK(k->registry().dump() == before);
}

TEST_CASE("clone_record examples")
{
    ServiceRecord rpc;
    rpc.name = "RpcSs";
    rpc.hosting = DllHosting{"rpcss", "c:\\WINNT\\system32\\rpcss.dll"};
    rpc.start_type = StartType::Auto;
    auto c = clone_record(rpc, VmId{3});
    CHECK(c.name == "RpcSs-vm3");
    CHECK(c.start_type == StartType::Manual);
    CHECK(*c.group() == "rpcss-vm3");
    CHECK(std::get<DllHosting>(c.hosting).service_dll == "c:\\WINNT\\system32\\rpcss.dll");
    CHECK(c.process_params() == std::vector<std::string>{"-k", "rpcss-vm3"});

    ServiceRecord plain;
    plain.name = "MySQL";
    plain.hosting = ExeHosting{"c:\\mysql\\bin\\mysqld-nt.exe", {"--defaults-file=my.ini"}};
    plain.start_type = StartType::Auto;
    auto p = clone_record(plain, VmId{1});
    CHECK(gen::field_diff(plain, p) == std::set<std::string>{"name", "start_type", "image_path"});
}

TEST_CASE("clones differ from originals only where allowed")
{
    std::mt19937 rng(79);
    for (int i = 0; i < 300; ++i) {
        const auto original = gen::record(rng, gen::ident(rng), gen::distinct_names(rng, 4));
        const std::uint32_t vm = 1 + rng() % 50;
        const auto clone = clone_record(original, VmId{vm});
        const auto diff = gen::field_diff(original, clone);
        const auto allowed = gen::allowed_clone_diff(original);
        CHECK(std::includes(allowed.begin(), allowed.end(), diff.begin(), diff.end()));
        CHECK(clone == gen::expected_clone(original, vm));
    }
}

TEST_CASE("registry clone changes only the allowed values")
{
    std::mt19937 rng(83);
    for (int i = 0; i < 60; ++i) {
        auto k = MachineSpec{}.boot();
        k->create_vm();
        auto names = gen::distinct_names(rng, 4);
        auto rec = gen::record(rng, names[0], {names.begin() + 1, names.end()});
        k->scm().create_service(rec);
        // Extra values the SCM does not interpret must survive untouched.
        auto key = *k->registry().open_key(service_key_path(rec.name));
        k->registry().set_value(key, {"Description", std::string("d") + std::to_string(i)});
        k->registry().set_value(k->registry().create_key(service_key_path(rec.name).child("Enum")),
                                {"Count", std::int64_t(i)});

        const auto clone = k->virtualizer().clone_scm_entries(rec.name, VmId{1});
        CHECK(clone == gen::expected_clone(rec, 1));

        auto src = k->registry().enumerate(service_key_path(rec.name));
        auto dst = k->registry().enumerate(service_key_path(clone.name));
        REQUIRE(src.size() == dst.size());
        const std::set<std::string> editable{"Start", "DependOnService", rec.is_dll() ? "Arguments" : "ImagePath"};
        for (std::size_t j = 0; j < src.size(); ++j) {
            CHECK(src[j].relative_path == dst[j].relative_path);
            if (!src[j].value || src[j].value == dst[j].value)
                continue;
            CHECK_MESSAGE(editable.contains(src[j].value->name), src[j].value->name);
        }
    }
}

TEST_CASE("every transitive dependency gets a clone")
{
    std::mt19937 rng(89);
    for (int round = 0; round < 60; ++round) {
        auto g = gen::dag(rng, 2 + rng() % 7, 0.35);
        auto k = MachineSpec{}.boot();
        k->create_vm();
        k->create_vm();
        for (const auto& r : gen::dag_records(g))
            k->scm().create_service(r);
        const auto& target = g.names[rng() % g.names.size()];
        const std::uint32_t vm = 1 + rng() % 2;
        k->virtualizer().virtualize_service(target, VmId{vm});
        const std::string root = target;
        for (const auto& s : k->scm().compute_start_order(std::span<const std::string>(&root, 1))) {
            if (is_virtualized(s))
                continue;
            CHECK_MESSAGE(k->scm().find(virtualized_name(s, VmId{vm})), s);
        }
    }
}

TEST_CASE("scan finds the two hard-coded names of the rpcss image")
{
    ImageStore images;
    auto sc = MachineSpec{}.image("rpcss", "c:\\x\\rpcss.dll", rpcss_script()).scenario();
    images.add(sc.images.at(0).first);
    auto found = scan_image_for_hardcoded_names(images, "rpcss");
    REQUIRE(found.size() == 2);
    CHECK(found[0] == HardCodedName{1, ApiClass::StringApi, "RPCSS"});
    CHECK(found[1] == HardCodedName{2, ApiClass::ServiceApi, "RpcSS"});

    CHECK_ERROR_CODE(scan_image_for_hardcoded_names(images, "missing"), ErrorCode::UnknownImage);
}

TEST_CASE("scan on a self-named image is empty")
{
    std::vector<Action> script{action::ConnectControlPipe{}, action::RegisterCtrlHandler{ServiceRef::self()},
                               action::OpenService{ServiceRef::self()}, action::SignalRunning{}};
    CHECK(scan_script(script).empty());
}

TEST_CASE("scan count equals the literal count over random scripts")
{
    std::mt19937 rng(97);
    for (int i = 0; i < 300; ++i) {
        std::size_t literals = 0;
        auto script = gen::script(rng, rng() % 20, literals);
        CHECK(scan_script(script).size() == literals);
    }
}

TEST_CASE("hard-coded names fail without rewriting and run with it")
{
    for (bool rewrite : {false, true}) {
        CAPTURE(rewrite);
        MachineSpec m;
        m.dll("RpcSs", "rpcss", true, {}, rpcss_script());
        RunOptions opt;
        opt.disable_name_rewrite = !rewrite;
        auto k = m.boot(opt);
        k->run(1000);
        REQUIRE(k->scm().status("RpcSs").str() == "Running");
        k->create_vm();
        k->virtualizer().virtualize_service("RpcSs", VmId{1});
        k->scm().start_service("RpcSs-vm1");
        k->run(1000);
        CHECK(k->scm().status("RpcSs-vm1").str() == (rewrite ? "Running" : "Failed(name-conflict)"));
    }
}

}
