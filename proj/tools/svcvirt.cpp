// svcvirt: run service virtualization scenarios and diff their traces.

#include "svcvirt/analyzer.hpp"
#include "svcvirt/error.hpp"
#include "svcvirt/exemptions.hpp"
#include "svcvirt/scenario.hpp"
#include "svcvirt/trace.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace svcvirt;

namespace {

int cmd_run(const std::string& path, RunOptions options, const std::string& out_dir,
            const std::optional<std::string>& exemptions_file)
{
    // Everything is parsed before anything is written.
    const auto scenario = load_scenario(path);
    if (exemptions_file)
        options.exemptions = ExemptionList::load(*exemptions_file);
    const auto result = run_scenario(scenario, options);

    if (!out_dir.empty())
        write_outputs(result, out_dir);
    else
        std::cout << result.status_report;
    std::cerr << result.summary_text();
    return result.ok() ? 0 : 1;
}

int cmd_analyze(const std::string& host_path, const std::string& vm_path)
{
    const auto host = load_trace(host_path);
    const auto vm = load_trace(vm_path);
    const auto proposals = diff_traces(host, vm);
    std::cout << "# proposals: " << proposals.size() << '\n' << format_proposals(proposals);
    std::cout << "# patterns\n" << ExemptionList(apply_proposals(proposals)).format();
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Windows service virtualization simulator"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run a scenario file");
    std::string scenario_path;
    std::string out_dir;
    std::string variant;
    std::string exemptions_file;
    RunOptions options;
    run->add_option("scenario", scenario_path, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
    run->add_flag("--disable-exemptions", options.disable_exemptions, "Rename every IPC object, exempt or not");
    run->add_flag("--disable-name-rewrite", options.disable_name_rewrite,
                  "Pass hard-coded service names through unchanged");
    run->add_option("--out", out_dir, "Directory for status, trace and dump files");
    run->add_option("--variant", variant, "Run the named command variant instead of the main commands");
    run->add_option("--exemptions", exemptions_file, "Exemption list file overriding the scenario's")
        ->check(CLI::ExistingFile);

    auto* analyze = app.add_subcommand("analyze", "Propose exemptions from a host trace and a VM trace");
    std::string host_trace;
    std::string vm_trace;
    analyze->add_option("host-trace", host_trace)->required();
    analyze->add_option("vm-trace", vm_trace)->required();

    app.add_subcommand("dump-defaults", "Print the built-in exemption list");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (!variant.empty())
                options.variant = variant;
            return cmd_run(scenario_path, options, out_dir,
                           exemptions_file.empty() ? std::nullopt : std::optional<std::string>(exemptions_file));
        }
        if (analyze->parsed())
            return cmd_analyze(host_trace, vm_trace);
        std::cout << ExemptionList::default_file_text();
        return 0;
    } catch (const Error& e) {
        std::cerr << "svcvirt: " << to_string(e.code()) << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "svcvirt: " << e.what() << '\n';
        return 2;
    }
}
