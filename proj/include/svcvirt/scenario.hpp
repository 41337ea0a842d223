#pragma once

#include "svcvirt/exemptions.hpp"
#include "svcvirt/image.hpp"
#include "svcvirt/kernel.hpp"
#include "svcvirt/registry.hpp"
#include "svcvirt/service_record.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace svcvirt {

namespace command {

struct CreateVm {};
struct Virtualize {
    std::string service;
    std::uint32_t vm = 0;
};
struct Start {
    std::string service;
};
struct Stop {
    std::string service;
};
struct Run {
    std::optional<std::uint64_t> steps;  // unset: until quiescent
};
struct RegistrySet {
    std::string key;
    RegistryValue value;
};

} // namespace command

struct Command {
    std::variant<command::CreateVm, command::Virtualize, command::Start, command::Stop, command::Run,
                 command::RegistrySet>
        body;
    std::optional<std::string> expect_error;  // error code the command must raise
    std::string where;                        // location in the scenario file
};

// Conditions under which an expectation applies; unset fields match anything.
struct When {
    std::optional<bool> disable_exemptions;
    std::optional<bool> disable_name_rewrite;
    std::optional<std::string> variant;
};

struct TracePattern {
    std::optional<std::string> op;
    std::optional<std::string> arg;   // case-insensitive; a trailing * matches any suffix
    std::optional<std::string> xarg;
    std::optional<std::string> result;
    std::optional<std::string> vm;    // "host" or a VM id
};

struct Expectation {
    struct ServiceIs {
        std::string service;
        std::string status;
    };
    struct TraceHas {
        TracePattern pattern;
        bool present = true;
    };
    struct ObjectHas {
        std::string name;
        bool present = true;
    };
    struct Quiescent {
        bool value = true;
    };

    std::variant<ServiceIs, TraceHas, ObjectHas, Quiescent> check;
    When when;
    std::string where;
};

struct Scenario {
    std::string name;
    std::string description;
    std::uint64_t step_limit = 1;
    // Unset: the shipped default list.
    std::optional<ExemptionList> exemptions;
    std::vector<std::pair<ServiceImage, std::vector<std::string>>> images;  // image, install paths
    std::vector<std::pair<RegistryPath, RegistryValue>> registry;
    std::vector<ServiceRecord> services;
    std::vector<std::string> core_processes;
    std::vector<Command> commands;
    std::map<std::string, std::vector<Command>> variants;
    std::vector<Expectation> expect;
};

// Throws Error(ParseError) naming the file and the offending location.
Scenario parse_scenario(std::string_view text, const std::string& origin, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

struct RunOptions {
    bool disable_exemptions = false;
    bool disable_name_rewrite = false;
    std::optional<std::string> variant;
    std::optional<ExemptionList> exemptions;  // overrides the scenario's list
};

struct ScenarioResult {
    std::string status_report;
    std::string trace_log;
    std::string namespace_dump;
    std::string registry_dump;
    std::string process_dump;
    std::string virtualize_log;
    RunSummary summary;
    std::uint64_t total_steps = 0;
    std::vector<std::string> failures;  // failed expectations and unexpected command errors
    std::vector<std::string> warnings;  // hard-coded service names found in images

    bool ok() const { return failures.empty(); }
    std::string summary_text() const;
};

// Builds the machine a scenario describes and boots it; no commands run yet.
// Hard-coded service names found in the images are appended to `warnings`.
std::unique_ptr<Kernel> boot_scenario(const Scenario& scenario, const RunOptions& options,
                                      std::vector<std::string>* warnings = nullptr);

ScenarioResult run_scenario(const Scenario& scenario, const RunOptions& options);

// Writes status.txt, trace.log, namespace.txt, registry.txt, processes.txt,
// virtualize.log and summary.txt into `dir`, creating it if needed.
void write_outputs(const ScenarioResult& result, const std::string& dir);

} // namespace svcvirt
