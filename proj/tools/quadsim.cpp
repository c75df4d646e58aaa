// quadsim command line: run one scenario, a directory of scenarios, or
// recompute a report from a telemetry file.

#include "quadsim/sim/batch.hpp"
#include "quadsim/sim/report.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace quadsim::sim;

namespace {

void print_report(const RunReport& r, bool quiet) {
    if (quiet) return;
    std::cout << to_json(r).dump(2) << '\n';
}

int cmd_run(const std::string& file, std::optional<std::uint64_t> seed, const std::string& out, bool quiet) {
    Scenario s = load_scenario(file);
    if (seed) s.seed = *seed;
    const fs::path telemetry = out.empty() ? fs::path(fs::path(file).stem().string() + ".jsonl") : fs::path(out);
    const RunResult r = run_scenario(s, telemetry);
    print_report(r.report, quiet);
    for (const auto& f : r.report.expectation_failures) std::cerr << "expectation failed: " << f << '\n';
    return exit_code(r.report);
}

int cmd_batch(const std::string& dir, std::optional<std::uint64_t> seed, const std::string& out, unsigned jobs,
              bool quiet) {
    BatchOptions opt;
    opt.jobs = jobs;
    opt.seed = seed;
    if (!out.empty()) opt.out_dir = out;
    const BatchSummary summary = run_batch(dir, opt);
    const std::string csv = summary_csv(summary);
    if (opt.out_dir) {
        fs::create_directories(*opt.out_dir);
        std::ofstream(*opt.out_dir / "summary.csv") << csv;
    }
    if (!quiet) std::cout << csv;
    return summary.exit_code;
}

int cmd_report(const std::string& file, bool quiet) {
    const RunReport r = report_from_file(file);
    print_report(r, quiet);
    return exit_code(r);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quadrotor flight-control and attack-surface simulator"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    std::string out;
    unsigned jobs = 1;
    bool quiet = false;
    app.add_option("--seed", seed, "Override the scenario RNG seed");
    app.add_option("--out", out, "Telemetry file (run) or output directory (batch)");
    app.add_option("--jobs", jobs, "Parallel scenarios for batch")->check(CLI::PositiveNumber);
    app.add_flag("--quiet", quiet, "Print nothing on success");

    std::string target;
    auto* run = app.add_subcommand("run", "Run one scenario file");
    run->add_option("file", target, "Scenario TOML")->required();
    auto* batch = app.add_subcommand("batch", "Run every scenario in a directory");
    batch->add_option("dir", target, "Directory of scenario TOML files")->required();
    auto* report = app.add_subcommand("report", "Recompute the report from a telemetry file");
    report->add_option("telemetry", target, "Telemetry JSONL file")->required();
    for (auto* sub : {run, batch, report}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfigError;
    }

    try {
        if (*run) return cmd_run(target, seed, out, quiet);
        if (*batch) return cmd_batch(target, seed, out, jobs, quiet);
        return cmd_report(target, quiet);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
