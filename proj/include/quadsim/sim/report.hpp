#pragma once

#include "quadsim/sim/engine.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace quadsim::sim {

struct AttackOutcome {
    double time{0.0};
    std::string type;
    /// Status string echoed by the engine ("accepted", "applied", ...).
    std::string detail;
    bool fired{false};

    bool operator==(const AttackOutcome&) const = default;
};

/// Outcome metrics; every field is derived from telemetry lines only.
struct RunReport {
    std::string name;
    std::uint64_t seed{0};
    double final_position_error{0.0};
    double max_lean{0.0};
    bool crash_confirmed{false};
    safety::FailsafeStage stage{safety::FailsafeStage::none};
    bool diverged{false};
    /// First time after which the tracking error stays inside 0.1 m; empty if never.
    std::optional<double> settling_time;
    double rms_tracking_error{0.0};
    double rms_estimation_error{0.0};
    double max_motor_command{0.0};
    bool steady_state_saturation{false};
    std::uint64_t gate_rejects{0};
    std::uint64_t plant_clamp_events{0};
    std::vector<AttackOutcome> attacks;
    std::vector<std::string> expectation_failures;
    bool passed{true};
    double end_time{0.0};
    std::string end_reason;

    bool operator==(const RunReport&) const = default;
};

constexpr double kSettleBand = 0.1;

/// Throws std::runtime_error on a malformed log (no header, bad JSON).
RunReport report_from_lines(const std::vector<std::string>& lines);
RunReport report_from_file(const std::filesystem::path& path);

nlohmann::json to_json(const RunReport& r);

/// 0 pass, 1 expectation failure, 2 divergence.
int exit_code(const RunReport& r);

inline constexpr int kExitConfigError = 3;

struct RunResult {
    RunReport report;
    std::vector<std::string> telemetry;
};

/// Runs to duration or shutdown. When `telemetry_path` is set the log is
/// written there (also for a diverged run). Throws ConfigError.
RunResult run_scenario(const Scenario& s, const std::optional<std::filesystem::path>& telemetry_path = {});

}  // namespace quadsim::sim
