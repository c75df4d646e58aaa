#include "quadsim/sim/batch.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <thread>

namespace quadsim::sim {

namespace fs = std::filesystem;

namespace {

BatchRow run_one(const fs::path& file, const BatchOptions& opt) {
    BatchRow row;
    row.file = file.filename().string();
    try {
        Scenario s = load_scenario(file);
        if (opt.seed) s.seed = *opt.seed;
        row.name = s.name;
        std::optional<fs::path> out;
        if (opt.out_dir) out = *opt.out_dir / (file.stem().string() + ".jsonl");
        RunResult r = run_scenario(s, out);
        row.exit_code = exit_code(r.report);
        row.status = r.report.passed ? "pass" : (r.report.diverged ? "diverged" : "fail");
        if (!r.report.expectation_failures.empty()) {
            std::string joined;
            for (const auto& f : r.report.expectation_failures) joined += (joined.empty() ? "" : "; ") + f;
            row.error = joined;
        }
        row.report = std::move(r.report);
    } catch (const ConfigError& e) {
        row.status = "config_error";
        row.exit_code = kExitConfigError;
        row.error = e.what();
    } catch (const std::exception& e) {
        row.status = "error";
        row.exit_code = 2;
        row.error = e.what();
    }
    return row;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

BatchSummary run_batch(const fs::path& dir, const BatchOptions& options) {
    if (!fs::is_directory(dir)) throw ConfigError(dir.string() + ": not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".toml") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    BatchSummary summary;
    summary.rows.resize(files.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < files.size(); i = next++) {
            summary.rows[i] = run_one(files[i], options);
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(files.size())));
    std::vector<std::thread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (const auto& row : summary.rows) summary.exit_code = std::max(summary.exit_code, row.exit_code);
    return summary;
}

std::string summary_csv(const BatchSummary& s) {
    std::ostringstream os;
    os.precision(17);
    os << "file,name,status,exit_code,final_position_error,rms_tracking_error,max_lean,crash,failsafe_stage,"
          "diverged,error\n";
    for (const auto& row : s.rows) {
        os << csv_field(row.file) << ',' << csv_field(row.name) << ',' << row.status << ',' << row.exit_code << ',';
        if (row.report) {
            const RunReport& r = *row.report;
            os << r.final_position_error << ',' << r.rms_tracking_error << ',' << r.max_lean << ','
               << (r.crash_confirmed ? "true" : "false") << ',' << safety::to_string(r.stage) << ','
               << (r.diverged ? "true" : "false") << ',';
        } else {
            os << ",,,,,,";
        }
        os << csv_field(row.error) << '\n';
    }
    return os.str();
}

}  // namespace quadsim::sim
