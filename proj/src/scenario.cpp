#include "svcvirt/scenario.hpp"

#include "svcvirt/error.hpp"
#include "svcvirt/service_name.hpp"
#include "svcvirt/virtualizer.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace svcvirt {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class Reader {
public:
    explicit Reader(std::string origin) : origin_(std::move(origin)) {}

    [[noreturn]] void fail(const std::string& where, const std::string& what) const
    {
        throw Error(ErrorCode::ParseError, origin_ + ": " + (where.empty() ? "/" : where) + ": " + what);
    }

    const json& object(const json& j, const std::string& where) const
    {
        if (!j.is_object())
            fail(where, "expected an object");
        return j;
    }

    const json& array(const json& j, const std::string& where) const
    {
        if (!j.is_array())
            fail(where, "expected an array");
        return j;
    }

    void keys(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) const
    {
        object(j, where);
        for (const auto& [k, _] : j.items()) {
            if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
                fail(where, "unknown field '" + k + "'");
        }
    }

    const json& field(const json& j, const std::string& where, const char* name) const
    {
        if (!j.contains(name))
            fail(where, std::string("missing field '") + name + "'");
        return j.at(name);
    }

    std::string string(const json& j, const std::string& where) const
    {
        if (!j.is_string())
            fail(where, "expected a string");
        return j.get<std::string>();
    }

    std::string string_field(const json& j, const std::string& where, const char* name) const
    {
        return string(field(j, where, name), where + "/" + name);
    }

    std::optional<std::string> opt_string(const json& j, const std::string& where, const char* name) const
    {
        if (!j.contains(name))
            return std::nullopt;
        return string(j.at(name), where + "/" + name);
    }

    std::uint64_t uint(const json& j, const std::string& where) const
    {
        if (!j.is_number_integer() || j.get<std::int64_t>() < 0)
            fail(where, "expected a non-negative integer");
        return j.get<std::uint64_t>();
    }

    bool boolean(const json& j, const std::string& where) const
    {
        if (!j.is_boolean())
            fail(where, "expected true or false");
        return j.get<bool>();
    }

    std::vector<std::string> strings(const json& j, const std::string& where) const
    {
        std::vector<std::string> out;
        array(j, where);
        for (std::size_t i = 0; i < j.size(); ++i)
            out.push_back(string(j[i], where + "/" + std::to_string(i)));
        return out;
    }

    // Wraps library errors raised while building a value with its location.
    template <typename F>
    auto guarded(const std::string& where, F&& f) const
    {
        try {
            return f();
        } catch (const Error& e) {
            // Already located by a nested fail().
            if (e.code() == ErrorCode::ParseError && std::string_view(e.what()).starts_with(origin_ + ": "))
                throw;
            fail(where, e.what());
        }
    }

private:
    std::string origin_;
};

ServiceRef parse_ref(const Reader& r, const json& j, const std::string& where)
{
    if (j.is_string()) {
        if (j.get<std::string>() != "self")
            r.fail(where, "service name must be \"self\" or {\"hard_coded\": ...}");
        return ServiceRef::self();
    }
    r.keys(j, where, {"hard_coded"});
    return ServiceRef::literal(r.string_field(j, where, "hard_coded"));
}

ObjectKind parse_kind(const Reader& r, const json& j, const std::string& where)
{
    const auto text = r.string_field(j, where, "kind");
    return r.guarded(where + "/kind", [&] { return parse_object_kind(text); });
}

Action parse_action(const Reader& r, const json& j, const std::string& where)
{
    r.object(j, where);
    const auto op = r.string_field(j, where, "op");
    const auto fatal = [&] { return j.contains("fatal") && r.boolean(j.at("fatal"), where + "/fatal"); };

    if (op == "connect-control-pipe") {
        r.keys(j, where, {"op"});
        return action::ConnectControlPipe{};
    }
    if (op == "register-ctrl-handler" || op == "open-service" || op == "string-api-use") {
        r.keys(j, where, {"op", "name"});
        const auto ref = parse_ref(r, r.field(j, where, "name"), where + "/name");
        if (op == "register-ctrl-handler")
            return action::RegisterCtrlHandler{ref};
        if (op == "open-service")
            return action::OpenService{ref};
        return action::StringApiUse{ref};
    }
    if (op == "create-object" || op == "open-object") {
        r.keys(j, where, {"op", "kind", "name", "fatal"});
        const auto kind = parse_kind(r, j, where);
        const auto name = r.string_field(j, where, "name");
        r.guarded(where + "/name", [&] { return ObjectName::parse(name); });
        if (op == "create-object")
            return action::CreateObject{kind, name, fatal()};
        return action::OpenObject{kind, name, fatal()};
    }
    if (op == "delete-object") {
        r.keys(j, where, {"op", "name"});
        const auto name = r.string_field(j, where, "name");
        r.guarded(where + "/name", [&] { return ObjectName::parse(name); });
        return action::DeleteObject{name};
    }
    if (op == "wait-for-service") {
        r.keys(j, where, {"op", "name"});
        return action::WaitForService{r.string_field(j, where, "name")};
    }
    if (op == "signal-running") {
        r.keys(j, where, {"op"});
        return action::SignalRunning{};
    }
    if (op == "sleep") {
        r.keys(j, where, {"op", "steps"});
        return action::Sleep{static_cast<std::uint32_t>(r.uint(r.field(j, where, "steps"), where + "/steps"))};
    }
    if (op == "stop") {
        r.keys(j, where, {"op"});
        return action::Stop{};
    }
    if (op == "fail") {
        r.keys(j, where, {"op", "reason"});
        return action::Fail{r.string_field(j, where, "reason")};
    }
    r.fail(where + "/op", "unknown action '" + op + "'");
}

RegistryPayload parse_payload(const Reader& r, const json& j, const std::string& where)
{
    if (j.is_string())
        return j.get<std::string>();
    if (j.is_number_integer())
        return j.get<std::int64_t>();
    if (j.is_array())
        return r.strings(j, where);
    r.fail(where, "registry values are strings, integers or string arrays");
}

ServiceRecord parse_service(const Reader& r, const json& j, const std::string& where)
{
    r.keys(j, where,
           {"name", "image_path", "params", "dll", "group", "host", "start", "depends_on", "depends_on_groups"});
    ServiceRecord rec;
    rec.name = r.string_field(j, where, "name");
    if (j.contains("dll")) {
        if (j.contains("image_path") || j.contains("params"))
            r.fail(where, "a shared service takes dll/group/host, not image_path/params");
        DllHosting dll;
        dll.service_dll = r.string_field(j, where, "dll");
        dll.group = r.string_field(j, where, "group");
        if (const auto host = r.opt_string(j, where, "host"))
            dll.host_path = *host;
        rec.hosting = dll;
    } else {
        if (j.contains("group") || j.contains("host"))
            r.fail(where, "group/host need a dll");
        ExeHosting exe;
        exe.image_path = r.string_field(j, where, "image_path");
        if (j.contains("params"))
            exe.params = r.strings(j.at("params"), where + "/params");
        rec.hosting = exe;
    }
    const auto start = r.opt_string(j, where, "start").value_or("manual");
    if (start == "auto")
        rec.start_type = StartType::Auto;
    else if (start == "manual")
        rec.start_type = StartType::Manual;
    else
        r.fail(where + "/start", "expected \"auto\" or \"manual\"");
    if (j.contains("depends_on"))
        rec.depends_on_services = r.strings(j.at("depends_on"), where + "/depends_on");
    if (j.contains("depends_on_groups"))
        rec.depends_on_groups = r.strings(j.at("depends_on_groups"), where + "/depends_on_groups");
    r.guarded(where, [&] {
        rec.validate();
        return 0;
    });
    return rec;
}

Command parse_command(const Reader& r, const json& j, const std::string& where)
{
    r.object(j, where);
    Command c;
    c.where = where;
    const auto cmd = r.string_field(j, where, "cmd");
    if (const auto e = r.opt_string(j, where, "expect_error")) {
        ErrorCode code;
        if (!parse_error_code(*e, code))
            r.fail(where + "/expect_error", "unknown error code '" + *e + "'");
        c.expect_error = e;
    }
    if (cmd == "create-vm") {
        r.keys(j, where, {"cmd", "expect_error"});
        c.body = command::CreateVm{};
    } else if (cmd == "virtualize") {
        r.keys(j, where, {"cmd", "service", "vm", "expect_error"});
        const auto vm = r.uint(r.field(j, where, "vm"), where + "/vm");
        if (vm == 0)
            r.fail(where + "/vm", "VM ids start at 1");
        c.body = command::Virtualize{r.string_field(j, where, "service"), static_cast<std::uint32_t>(vm)};
    } else if (cmd == "start" || cmd == "stop") {
        r.keys(j, where, {"cmd", "service", "expect_error"});
        const auto service = r.string_field(j, where, "service");
        if (cmd == "start")
            c.body = command::Start{service};
        else
            c.body = command::Stop{service};
    } else if (cmd == "run") {
        r.keys(j, where, {"cmd", "steps", "expect_error"});
        command::Run run;
        if (j.contains("steps"))
            run.steps = r.uint(j.at("steps"), where + "/steps");
        c.body = run;
    } else if (cmd == "registry-set") {
        r.keys(j, where, {"cmd", "key", "name", "value", "expect_error"});
        const auto key = r.string_field(j, where, "key");
        r.guarded(where + "/key", [&] { return RegistryPath::parse(key); });
        c.body = command::RegistrySet{
            key, {r.string_field(j, where, "name"), parse_payload(r, r.field(j, where, "value"), where + "/value")}};
    } else {
        r.fail(where + "/cmd", "unknown command '" + cmd + "'");
    }
    return c;
}

std::vector<Command> parse_commands(const Reader& r, const json& j, const std::string& where)
{
    std::vector<Command> out;
    r.array(j, where);
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(parse_command(r, j[i], where + "/" + std::to_string(i)));
    return out;
}

When parse_when(const Reader& r, const json& j, const std::string& where)
{
    r.keys(j, where, {"disable_exemptions", "disable_name_rewrite", "variant"});
    When w;
    if (j.contains("disable_exemptions"))
        w.disable_exemptions = r.boolean(j.at("disable_exemptions"), where + "/disable_exemptions");
    if (j.contains("disable_name_rewrite"))
        w.disable_name_rewrite = r.boolean(j.at("disable_name_rewrite"), where + "/disable_name_rewrite");
    w.variant = r.opt_string(j, where, "variant");
    return w;
}

Expectation parse_expectation(const Reader& r, const json& j, const std::string& where)
{
    r.object(j, where);
    Expectation e;
    e.where = where;
    if (j.contains("when"))
        e.when = parse_when(r, j.at("when"), where + "/when");
    const auto present = [&] { return !j.contains("present") || r.boolean(j.at("present"), where + "/present"); };

    if (j.contains("service")) {
        r.keys(j, where, {"service", "status", "when"});
        e.check = Expectation::ServiceIs{r.string_field(j, where, "service"), r.string_field(j, where, "status")};
    } else if (j.contains("trace")) {
        r.keys(j, where, {"trace", "present", "when"});
        const auto& t = j.at("trace");
        const auto tw = where + "/trace";
        r.keys(t, tw, {"op", "arg", "xarg", "result", "vm"});
        TracePattern p{r.opt_string(t, tw, "op"), r.opt_string(t, tw, "arg"), r.opt_string(t, tw, "xarg"),
                       r.opt_string(t, tw, "result"), r.opt_string(t, tw, "vm")};
        e.check = Expectation::TraceHas{p, present()};
    } else if (j.contains("object")) {
        r.keys(j, where, {"object", "present", "when"});
        e.check = Expectation::ObjectHas{r.string_field(j, where, "object"), present()};
    } else if (j.contains("quiescent")) {
        r.keys(j, where, {"quiescent", "when"});
        e.check = Expectation::Quiescent{r.boolean(j.at("quiescent"), where + "/quiescent")};
    } else {
        r.fail(where, "expectation needs one of service, trace, object, quiescent");
    }
    return e;
}

// Every service or VM a command names must exist by the time it runs.
void check_references(const Reader& r, const Scenario& s, const std::vector<Command>& commands)
{
    std::set<std::string, CaseInsensitiveLess> services;
    for (const auto& rec : s.services)
        services.insert(rec.name);
    const auto services_key = RegistryPath::parse(kServicesKey);
    for (const auto& [path, _] : s.registry) {
        const auto& segs = path.segments();
        const auto& base = services_key.segments();
        if (segs.size() > base.size() &&
            std::equal(base.begin(), base.end(), segs.begin(), [](const auto& a, const auto& b) { return iequals(a, b); }))
            services.insert(segs[base.size()]);
    }

    std::uint32_t vms = 0;
    const auto known = [&](const std::string& name, const std::string& where) {
        if (!services.contains(base_name(name)))
            r.fail(where + "/service", "unknown service '" + name + "'");
        if (const auto vm = vm_suffix(name); vm && vm->value > vms)
            r.fail(where + "/service", "'" + name + "' names a VM that has not been created");
    };
    for (const auto& c : commands) {
        if (std::holds_alternative<command::CreateVm>(c.body)) {
            ++vms;
        } else if (const auto* v = std::get_if<command::Virtualize>(&c.body)) {
            known(v->service, c.where);
            if (v->vm > vms)
                r.fail(c.where + "/vm", "VM " + std::to_string(v->vm) + " has not been created");
        } else if (const auto* st = std::get_if<command::Start>(&c.body)) {
            known(st->service, c.where);
        } else if (const auto* sp = std::get_if<command::Stop>(&c.body)) {
            known(sp->service, c.where);
        }
    }
}

bool wildcard_match(std::string_view pattern, std::string_view text)
{
    if (!pattern.empty() && pattern.back() == '*')
        return istarts_with(text, pattern.substr(0, pattern.size() - 1));
    return iequals(pattern, text);
}

bool matches(const TracePattern& p, const TraceEvent& e)
{
    return (!p.op || *p.op == e.op) && (!p.arg || wildcard_match(*p.arg, e.arg)) &&
           (!p.xarg || wildcard_match(*p.xarg, e.xarg)) && (!p.result || *p.result == e.result) &&
           (!p.vm || *p.vm == e.vm.str());
}

std::string describe(const TracePattern& p)
{
    std::string out;
    const auto add = [&](const char* k, const std::optional<std::string>& v) {
        if (v)
            out += std::string(out.empty() ? "" : " ") + k + "=" + *v;
    };
    add("op", p.op);
    add("arg", p.arg);
    add("xarg", p.xarg);
    add("result", p.result);
    add("vm", p.vm);
    return out;
}

bool applies(const When& w, const RunOptions& o)
{
    return (!w.disable_exemptions || *w.disable_exemptions == o.disable_exemptions) &&
           (!w.disable_name_rewrite || *w.disable_name_rewrite == o.disable_name_rewrite) &&
           (!w.variant || (o.variant && *w.variant == *o.variant));
}

} // namespace

Scenario parse_scenario(std::string_view text, const std::string& origin, const std::string& base_dir)
{
    const Reader r(origin);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, origin + ": byte " + std::to_string(e.byte) + ": malformed JSON");
    }
    r.keys(doc, "",
           {"name", "description", "step_limit", "exemptions", "images", "registry", "services", "core_processes",
            "commands", "variants", "expect"});

    Scenario s;
    s.name = r.string_field(doc, "", "name");
    s.description = r.opt_string(doc, "", "description").value_or("");
    s.step_limit = r.uint(r.field(doc, "", "step_limit"), "/step_limit");
    if (s.step_limit < 1)
        r.fail("/step_limit", "must be at least 1");

    if (doc.contains("exemptions")) {
        const auto& ex = doc.at("exemptions");
        if (ex.is_array()) {
            const auto lines = r.strings(ex, "/exemptions");
            s.exemptions = r.guarded("/exemptions", [&] { return ExemptionList::parse(join(lines, "\n")); });
        } else {
            const auto ref = r.string(ex, "/exemptions");
            if (ref == "none") {
                s.exemptions = ExemptionList{};
            } else if (ref != "default") {
                const auto path = (fs::path(base_dir) / ref).string();
                s.exemptions = r.guarded("/exemptions", [&] { return ExemptionList::load(path); });
            }
        }
    }

    if (doc.contains("images")) {
        const auto& imgs = r.array(doc.at("images"), "/images");
        std::set<std::string, CaseInsensitiveLess> ids;
        for (std::size_t i = 0; i < imgs.size(); ++i) {
            const auto where = "/images/" + std::to_string(i);
            const auto& j = imgs[i];
            r.keys(j, where, {"id", "path", "paths", "role", "script"});
            ServiceImage img;
            img.id = r.string_field(j, where, "id");
            if (!ids.insert(img.id).second)
                r.fail(where + "/id", "duplicate image id '" + img.id + "'");
            const auto role = r.opt_string(j, where, "role").value_or("service");
            if (role == "core")
                img.role = ImageRole::Core;
            else if (role != "service")
                r.fail(where + "/role", "expected \"service\" or \"core\"");
            const auto& script = r.array(r.field(j, where, "script"), where + "/script");
            for (std::size_t k = 0; k < script.size(); ++k)
                img.script.push_back(parse_action(r, script[k], where + "/script/" + std::to_string(k)));
            r.guarded(where, [&] {
                img.validate();
                return 0;
            });
            std::vector<std::string> paths;
            if (const auto p = r.opt_string(j, where, "path"))
                paths.push_back(*p);
            if (j.contains("paths")) {
                const auto more = r.strings(j.at("paths"), where + "/paths");
                paths.insert(paths.end(), more.begin(), more.end());
            }
            s.images.emplace_back(std::move(img), std::move(paths));
        }
    }

    if (doc.contains("registry")) {
        const auto& reg = r.object(doc.at("registry"), "/registry");
        for (const auto& [key, values] : reg.items()) {
            const auto where = "/registry/" + key;
            const auto path = r.guarded(where, [&] { return RegistryPath::parse(key); });
            r.object(values, where);
            for (const auto& [name, v] : values.items())
                s.registry.emplace_back(path, RegistryValue{name, parse_payload(r, v, where + "/" + name)});
        }
    }

    if (doc.contains("services")) {
        const auto& svcs = r.array(doc.at("services"), "/services");
        for (std::size_t i = 0; i < svcs.size(); ++i)
            s.services.push_back(parse_service(r, svcs[i], "/services/" + std::to_string(i)));
    }

    if (doc.contains("core_processes")) {
        s.core_processes = r.strings(doc.at("core_processes"), "/core_processes");
        for (std::size_t i = 0; i < s.core_processes.size(); ++i) {
            const auto& id = s.core_processes[i];
            const auto it = std::find_if(s.images.begin(), s.images.end(),
                                         [&](const auto& im) { return iequals(im.first.id, id); });
            const auto where = "/core_processes/" + std::to_string(i);
            if (it == s.images.end())
                r.fail(where, "unknown image '" + id + "'");
            if (it->second.empty())
                r.fail(where, "core image '" + id + "' has no path");
        }
    }

    if (doc.contains("commands"))
        s.commands = parse_commands(r, doc.at("commands"), "/commands");
    check_references(r, s, s.commands);

    if (doc.contains("variants")) {
        const auto& vs = r.object(doc.at("variants"), "/variants");
        for (const auto& [name, v] : vs.items()) {
            const auto where = "/variants/" + name;
            r.keys(v, where, {"commands"});
            auto cmds = parse_commands(r, r.field(v, where, "commands"), where + "/commands");
            check_references(r, s, cmds);
            s.variants.emplace(name, std::move(cmds));
        }
    }

    if (doc.contains("expect")) {
        const auto& ex = r.array(doc.at("expect"), "/expect");
        for (std::size_t i = 0; i < ex.size(); ++i) {
            auto e = parse_expectation(r, ex[i], "/expect/" + std::to_string(i));
            if (e.when.variant && !s.variants.contains(*e.when.variant))
                r.fail(e.where + "/when/variant", "unknown variant '" + *e.when.variant + "'");
            s.expect.push_back(std::move(e));
        }
    }
    return s;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::ParseError, path + ": cannot open");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path, fs::path(path).parent_path().string());
}

std::string ScenarioResult::summary_text() const
{
    std::ostringstream os;
    os << "steps=" << total_steps << " quiescent=" << (summary.quiescent ? "yes" : "no")
       << " trace_events=" << summary.trace_length << '\n';
    for (const auto& t : summary.timeouts)
        os << t << '\n';
    for (const auto& w : warnings)
        os << "warning " << w << '\n';
    for (const auto& f : failures)
        os << "FAILED " << f << '\n';
    os << (failures.empty() ? "all expectations hold" : std::to_string(failures.size()) + " failure(s)") << '\n';
    return os.str();
}

std::unique_ptr<Kernel> boot_scenario(const Scenario& scenario, const RunOptions& options,
                                      std::vector<std::string>* warnings)
{
    ExemptionList exemptions = options.exemptions ? *options.exemptions
                                                  : scenario.exemptions.value_or(ExemptionList::defaults());
    if (options.disable_exemptions)
        exemptions = ExemptionList{};

    auto kernel = std::make_unique<Kernel>(std::move(exemptions));
    kernel->set_name_rewrite(!options.disable_name_rewrite);

    for (const auto& [image, paths] : scenario.images) {
        kernel->images().add(image);
        for (const auto& p : paths)
            kernel->images().install(p, image.id);
        if (warnings == nullptr)
            continue;
        for (const auto& f : scan_script(image.script)) {
            warnings->push_back("image " + image.id + " action " + std::to_string(f.index) + " passes hard-coded " +
                                std::string(to_string(f.api)) + " name '" + f.literal + "'");
        }
    }
    for (const auto& [path, value] : scenario.registry)
        kernel->registry().set_value(kernel->registry().create_key(path), value);
    for (const auto& rec : scenario.services) {
        write_service_record(kernel->registry(), rec);
        if (const auto* group = rec.group()) {
            auto& reg = kernel->registry();
            const auto key = reg.create_key(RegistryPath::parse(kSvcHostKey));
            StringList members;
            if (const auto v = reg.get_value(key, *group); v && std::holds_alternative<StringList>(v->payload))
                members = std::get<StringList>(v->payload);
            members.push_back(rec.name);
            reg.set_value(key, {*group, members});
        }
    }
    kernel->boot(scenario.core_processes);
    return kernel;
}

ScenarioResult run_scenario(const Scenario& scenario, const RunOptions& options)
{
    const auto& commands = [&]() -> const std::vector<Command>& {
        if (!options.variant)
            return scenario.commands;
        const auto it = scenario.variants.find(*options.variant);
        if (it == scenario.variants.end())
            throw Error(ErrorCode::ParseError, scenario.name + ": unknown variant '" + *options.variant + "'");
        return it->second;
    }();

    ScenarioResult result;
    auto kernel = boot_scenario(scenario, options, &result.warnings);

    std::uint64_t budget = scenario.step_limit;
    const auto run_for = [&](std::uint64_t limit) {
        result.summary = kernel->run(std::min(limit, budget));
        budget -= result.summary.steps;
    };

    for (const auto& c : commands) {
        try {
            if (std::holds_alternative<command::CreateVm>(c.body)) {
                kernel->create_vm();
            } else if (const auto* v = std::get_if<command::Virtualize>(&c.body)) {
                kernel->virtualizer().virtualize_service(v->service, VmId{v->vm});
            } else if (const auto* st = std::get_if<command::Start>(&c.body)) {
                kernel->scm().start_service(st->service);
            } else if (const auto* sp = std::get_if<command::Stop>(&c.body)) {
                const auto stopped = kernel->scm().stop_service(sp->service);
                for (const auto& d : stopped.running_dependents)
                    result.warnings.push_back("stopped " + sp->service + " while dependent " + d + " is running");
            } else if (const auto* run = std::get_if<command::Run>(&c.body)) {
                run_for(run->steps.value_or(budget));
            } else if (const auto* rs = std::get_if<command::RegistrySet>(&c.body)) {
                auto& reg = kernel->registry();
                reg.set_value(reg.create_key(RegistryPath::parse(rs->key)), rs->value);
            }
            if (c.expect_error)
                result.failures.push_back(c.where + ": expected error " + *c.expect_error + ", command succeeded");
        } catch (const Error& e) {
            if (!c.expect_error || *c.expect_error != to_string(e.code()))
                result.failures.push_back(c.where + ": " + std::string(to_string(e.code())) + ": " + e.what());
        }
    }
    run_for(budget);
    result.total_steps = kernel->steps();

    const auto& events = kernel->trace().events();
    for (const auto& e : scenario.expect) {
        if (!applies(e.when, options))
            continue;
        if (const auto* s = std::get_if<Expectation::ServiceIs>(&e.check)) {
            const auto* rec = kernel->scm().find(s->service);
            const auto actual = rec ? kernel->scm().status(s->service).str() : std::string("<absent>");
            if (actual != s->status)
                result.failures.push_back(e.where + ": " + s->service + " is " + actual + ", expected " + s->status);
        } else if (const auto* t = std::get_if<Expectation::TraceHas>(&e.check)) {
            const bool found =
                std::any_of(events.begin(), events.end(), [&](const TraceEvent& ev) { return matches(t->pattern, ev); });
            if (found != t->present) {
                result.failures.push_back(e.where + ": trace event {" + describe(t->pattern) + "} " +
                                          (found ? "present" : "absent"));
            }
        } else if (const auto* o = std::get_if<Expectation::ObjectHas>(&e.check)) {
            const bool found = kernel->objects().find(o->name) != nullptr;
            if (found != o->present)
                result.failures.push_back(e.where + ": object " + o->name + (found ? " present" : " absent"));
        } else if (const auto* q = std::get_if<Expectation::Quiescent>(&e.check)) {
            if (result.summary.quiescent != q->value)
                result.failures.push_back(e.where + std::string(": run ") +
                                          (result.summary.quiescent ? "quiesced" : "did not quiesce"));
        }
    }

    result.status_report = kernel->scm().status_report();
    result.trace_log = kernel->trace().str();
    result.namespace_dump = kernel->objects().dump();
    result.registry_dump = kernel->registry().dump();
    result.process_dump = kernel->processes().dump();
    for (const auto& line : kernel->virtualizer().log())
        result.virtualize_log += line + "\n";
    return result;
}

void write_outputs(const ScenarioResult& result, const std::string& dir)
{
    fs::create_directories(dir);
    const auto put = [&](const char* name, const std::string& text) {
        std::ofstream out(fs::path(dir) / name, std::ios::binary);
        out << text;
        if (!out)
            throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
    };
    put("status.txt", result.status_report);
    put("trace.log", result.trace_log);
    put("namespace.txt", result.namespace_dump);
    put("registry.txt", result.registry_dump);
    put("processes.txt", result.process_dump);
    put("virtualize.log", result.virtualize_log);
    put("summary.txt", result.summary_text());
}

} // namespace svcvirt
