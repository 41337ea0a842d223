#include "support.hpp"
#include "common/machine.hpp"

#include <filesystem>
#include <fstream>

using namespace svcvirt;
using nlohmann::json;

namespace {

json minimal()
{
    return json{{"name", "t"}, {"step_limit", 100}};
}

std::string parse_message(const json& doc)
{
    try {
        parse_scenario(doc.dump(), "t.json");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ParseError);
        return e.what();
    }
    return {};
}

bool mentions(const std::string& msg, const std::string& piece)
{
    return msg.find(piece) != std::string::npos;
}

json svc(const std::string& name)
{
    return json{{"name", name}, {"image_path", "c:\\svc\\" + name + ".exe"}};
}

} // namespace

TEST_SUITE("scenario") {

TEST_CASE("a minimal scenario parses and runs")
{
    auto sc = parse_scenario(minimal().dump(), "t.json");
    CHECK(sc.name == "t");
    CHECK(sc.step_limit == 100);
    CHECK_FALSE(sc.exemptions);
    auto r = run_scenario(sc, {});
    CHECK(r.ok());
    CHECK(r.summary.quiescent);
}

TEST_CASE("malformed JSON names the file")
{
    CHECK_ERROR_CODE(parse_scenario("{\"name\": ", "broken.json"), ErrorCode::ParseError);
    try {
        parse_scenario("{\"name\": ", "broken.json");
    } catch (const Error& e) {
        CHECK(mentions(e.what(), "broken.json"));
    }
}

TEST_CASE("errors carry the location of the offending field")
{
    SUBCASE("unknown top-level field")
    {
        auto d = minimal();
        d["colour"] = "blue";
        const auto msg = parse_message(d);
        CHECK(mentions(msg, "t.json"));
        CHECK(mentions(msg, "colour"));
    }
    SUBCASE("missing step limit")
    {
        auto d = minimal();
        d.erase("step_limit");
        CHECK(mentions(parse_message(d), "step_limit"));
    }
    SUBCASE("zero step limit")
    {
        auto d = minimal();
        d["step_limit"] = 0;
        CHECK(mentions(parse_message(d), "/step_limit"));
    }
    SUBCASE("negative step limit")
    {
        auto d = minimal();
        d["step_limit"] = -4;
        CHECK(mentions(parse_message(d), "/step_limit"));
    }
    SUBCASE("unknown action")
    {
        auto d = minimal();
        d["images"] = json::array({{{"id", "x"}, {"path", "c:\\x.exe"}, {"script", {{{"op", "dance"}}}}}});
        const auto msg = parse_message(d);
        CHECK(mentions(msg, "/images/0/script/0/op"));
        CHECK(mentions(msg, "dance"));
    }
    SUBCASE("bad service name reference in a script")
    {
        auto d = minimal();
        d["images"] = json::array(
            {{{"id", "x"}, {"path", "c:\\x.exe"}, {"script", {{{"op", "open-service"}, {"name", "Other"}}}}}});
        CHECK(mentions(parse_message(d), "/images/0/script/0"));
    }
    SUBCASE("bad start type")
    {
        auto d = minimal();
        auto s = svc("A");
        s["start"] = "sometimes";
        d["services"] = json::array({s});
        CHECK(mentions(parse_message(d), "/services/0/start"));
    }
    SUBCASE("exe service with a group")
    {
        auto d = minimal();
        auto s = svc("A");
        s["group"] = "g";
        d["services"] = json::array({s});
        CHECK(mentions(parse_message(d), "/services/0"));
    }
    SUBCASE("malformed service name")
    {
        auto d = minimal();
        d["services"] = json::array({svc("A\\B")});
        CHECK(mentions(parse_message(d), "/services/0"));
    }
    SUBCASE("malformed registry path")
    {
        auto d = minimal();
        d["registry"] = {{"HKLM\\\\Broken", {{"v", 1}}}};
        CHECK(mentions(parse_message(d), "/registry/"));
    }
    SUBCASE("unknown error code in expect_error")
    {
        auto d = minimal();
        d["commands"] = json::array({{{"cmd", "create-vm"}, {"expect_error", "oops"}}});
        CHECK(mentions(parse_message(d), "/commands/0/expect_error"));
    }
    SUBCASE("unknown command")
    {
        auto d = minimal();
        d["commands"] = json::array({{{"cmd", "reboot"}}});
        CHECK(mentions(parse_message(d), "/commands/0/cmd"));
    }
    SUBCASE("expectation with nothing to check")
    {
        auto d = minimal();
        d["expect"] = json::array({json::object()});
        CHECK(mentions(parse_message(d), "/expect/0"));
    }
    SUBCASE("duplicate image id")
    {
        auto d = minimal();
        d["images"] = json::array({{{"id", "x"}, {"path", "c:\\a.exe"}, {"script", testing::well_behaved_script()}},
                                   {{"id", "X"}, {"path", "c:\\b.exe"}, {"script", testing::well_behaved_script()}}});
        CHECK(mentions(parse_message(d), "/images/1/id"));
    }
    SUBCASE("core process without an image")
    {
        auto d = minimal();
        d["core_processes"] = json::array({"ghost"});
        CHECK(mentions(parse_message(d), "/core_processes/0"));
    }
}

TEST_CASE("commands must refer to things that exist by then")
{
    SUBCASE("unknown service")
    {
        auto d = minimal();
        d["commands"] = json::array({{{"cmd", "start"}, {"service", "Nobody"}}});
        CHECK(mentions(parse_message(d), "unknown service 'Nobody'"));
    }
    SUBCASE("virtualize into a VM not yet created")
    {
        auto d = minimal();
        d["services"] = json::array({svc("A")});
        d["commands"] = json::array({{{"cmd", "virtualize"}, {"service", "A"}, {"vm", 1}}});
        CHECK(mentions(parse_message(d), "/commands/0/vm"));
    }
    SUBCASE("clone name for a VM not yet created")
    {
        auto d = minimal();
        d["services"] = json::array({svc("A")});
        d["commands"] = json::array({{{"cmd", "create-vm"}}, {{"cmd", "start"}, {"service", "A-vm2"}}});
        CHECK(mentions(parse_message(d), "/commands/1/service"));
    }
    SUBCASE("VM zero")
    {
        auto d = minimal();
        d["services"] = json::array({svc("A")});
        d["commands"] = json::array({{{"cmd", "virtualize"}, {"service", "A"}, {"vm", 0}}});
        CHECK(mentions(parse_message(d), "VM ids start at 1"));
    }
    SUBCASE("a service defined only through the registry section is known")
    {
        auto d = minimal();
        d["registry"] = {{"HKLM\\SYSTEM\\CurrentControlSet\\Services\\Raw",
                          {{"Type", 16}, {"Start", 3}, {"ImagePath", "c:\\raw.exe"}}}};
        d["commands"] = json::array({{{"cmd", "start"}, {"service", "Raw"}}});
        CHECK_NOTHROW(parse_scenario(d.dump(), "t.json"));
    }
}

TEST_CASE("variants")
{
    auto d = minimal();
    d["services"] = json::array({svc("A")});
    d["images"] = json::array({{{"id", "a"}, {"path", "c:\\svc\\A.exe"}, {"script", testing::well_behaved_script()}}});
    d["variants"] = {{"on", {{"commands", json::array({{{"cmd", "start"}, {"service", "A"}}, {{"cmd", "run"}}})}}},
                     {"off", {{"commands", json::array()}}}};
    d["expect"] = json::array({{{"service", "A"}, {"status", "Running"}, {"when", {{"variant", "on"}}}},
                               {{"service", "A"}, {"status", "Registered"}, {"when", {{"variant", "off"}}}}});
    auto sc = parse_scenario(d.dump(), "t.json");
    REQUIRE(sc.variants.size() == 2);

    RunOptions on;
    on.variant = "on";
    RunOptions off;
    off.variant = "off";
    auto r_on = run_scenario(sc, on);
    auto r_off = run_scenario(sc, off);
    CHECK_MESSAGE(r_on.ok(), r_on.summary_text());
    CHECK_MESSAGE(r_off.ok(), r_off.summary_text());

    RunOptions bad;
    bad.variant = "sideways";
    CHECK_ERROR_CODE(run_scenario(sc, bad), ErrorCode::ParseError);

    d["expect"][0]["when"]["variant"] = "sideways";
    CHECK(mentions(parse_message(d), "/expect/0/when/variant"));
}

TEST_CASE("failed expectations are reported, not thrown")
{
    auto d = minimal();
    d["services"] = json::array({svc("A")});
    d["expect"] = json::array({{{"service", "A"}, {"status", "Running"}},
                               {{"object", "\\BaseNamedObjects\\Nope"}},
                               {{"trace", {{"op", "spawn"}}}}});
    auto r = run_scenario(parse_scenario(d.dump(), "t.json"), {});
    REQUIRE(r.failures.size() == 2);
    CHECK(mentions(r.failures[0], "/expect/0"));
    CHECK(mentions(r.failures[0], "Registered"));
    CHECK(mentions(r.failures[1], "/expect/1"));
    CHECK(mentions(r.summary_text(), "2 failure(s)"));
}

TEST_CASE("expect_error: a command that should fail")
{
    auto d = minimal();
    d["services"] = json::array({svc("A")});
    d["images"] = json::array({{{"id", "a"}, {"path", "c:\\svc\\A.exe"}, {"script", testing::well_behaved_script()}}});
    d["commands"] = json::array({{{"cmd", "create-vm"}},
                                 {{"cmd", "virtualize"}, {"service", "A"}, {"vm", 1}},
                                 {{"cmd", "virtualize"}, {"service", "A"}, {"vm", 1}, {"expect_error", "already-virtualized"}}});
    auto r = run_scenario(parse_scenario(d.dump(), "t.json"), {});
    CHECK_MESSAGE(r.ok(), r.summary_text());

    d["commands"][2].erase("expect_error");
    r = run_scenario(parse_scenario(d.dump(), "t.json"), {});
    REQUIRE(r.failures.size() == 1);
    CHECK(mentions(r.failures[0], "already-virtualized"));

    d["commands"][2]["expect_error"] = "unknown-vm";
    d["commands"][2]["vm"] = 1;
    d["commands"].erase(1);
    r = run_scenario(parse_scenario(d.dump(), "t.json"), {});
    REQUIRE(r.failures.size() == 1);
    CHECK(mentions(r.failures[0], "command succeeded"));
}

TEST_CASE("exemption list references")
{
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "svcvirt-scenario-test";
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "mine.txt");
        out << "# custom\n\\BaseNamedObjects\\Shared\n";
    }
    auto d = minimal();
    d["exemptions"] = "mine.txt";
    auto sc = parse_scenario(d.dump(), "t.json", dir.string());
    REQUIRE(sc.exemptions);
    CHECK(sc.exemptions->size() == 1);
    CHECK(sc.exemptions->matches("\\BaseNamedObjects\\Shared"));

    d["exemptions"] = "none";
    CHECK(parse_scenario(d.dump(), "t.json").exemptions->size() == 0);

    d["exemptions"] = json::array({"\\A\\B", "\\Pipe\\P*"});
    auto inline_list = parse_scenario(d.dump(), "t.json").exemptions;
    REQUIRE(inline_list);
    CHECK(inline_list->matches("\\pipe\\p12"));

    d["exemptions"] = "missing.txt";
    CHECK(mentions(parse_message(d), "/exemptions"));
    fs::remove_all(dir);
}

TEST_CASE("write_outputs produces the full set of files")
{
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "svcvirt-outputs-test";
    fs::remove_all(dir);
    auto r = run_scenario(load_scenario(std::string(SVCVIRT_DATA_DIR) + "/scenarios/rpcss-two-vms.json"), {});
    write_outputs(r, dir.string());
    for (const char* f : {"status.txt", "trace.log", "namespace.txt", "registry.txt", "processes.txt",
                          "virtualize.log", "summary.txt"})
        CHECK_MESSAGE(fs::exists(dir / f), f);
    std::ifstream in(dir / "status.txt");
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == r.status_report);
    fs::remove_all(dir);
}

}
