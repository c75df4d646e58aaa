#pragma once

#include "quadsim/sim/report.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace quadsim::sim {

struct BatchRow {
    std::string file;
    std::string name;
    /// pass, fail, diverged or config_error.
    std::string status;
    int exit_code{0};
    std::optional<RunReport> report;
    std::string error;
};

struct BatchOptions {
    unsigned jobs{1};
    /// Telemetry files go here as <stem>.jsonl when set.
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed;
};

struct BatchSummary {
    std::vector<BatchRow> rows;
    int exit_code{0};
};

/// Runs every *.toml in `dir` (sorted by file name). Errors are collected per
/// row; the batch never stops early.
BatchSummary run_batch(const std::filesystem::path& dir, const BatchOptions& options = {});

std::string summary_csv(const BatchSummary& s);

}  // namespace quadsim::sim
