#include "quadsim/sim/batch.hpp"
#include "quadsim/sim/report.hpp"
#include "quadsim/sim/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

using namespace quadsim;
using namespace quadsim::sim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kData{QS_TEST_DATA};

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("quadsim_test_sim_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::vector<json> parsed(const std::vector<std::string>& lines) {
    std::vector<json> out;
    for (const auto& l : lines) out.push_back(json::parse(l));
    return out;
}

std::vector<json> states(const std::vector<std::string>& lines) {
    std::vector<json> out;
    for (auto& j : parsed(lines)) {
        if (j["type"] == "state") out.push_back(std::move(j));
    }
    return out;
}

Vec3 vec(const json& a) { return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()}; }

}  // namespace

// -- loading ---------------------------------------------------------------------

TEST(LoadScenario, MinimalFileTakesDefaults) {
    const Scenario s = parse_scenario("name = \"m\"\n");
    EXPECT_EQ(s.name, "m");
    EXPECT_DOUBLE_EQ(s.duration, 10.0);
    EXPECT_EQ(s.initial.position, (Vec3{0, 0, -5}));
    EXPECT_TRUE(s.plant.ground_contact);
    EXPECT_TRUE(s.attacks.empty());
    EXPECT_TRUE(s.sensors.attitude_passthrough);
}

TEST(LoadScenario, WaypointsMustIncrease) {
    try {
        load_scenario(kData / "invalid" / "waypoints.toml");
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.field(), "waypoints");
        EXPECT_NE(std::string(e.what()).find("waypoints not increasing"), std::string::npos);
    }
}

TEST(LoadScenario, LoopRateOutOfBounds) {
    try {
        load_scenario(kData / "invalid" / "loop_rate.toml");
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.field(), "params.SCHED_LOOP_RATE");
        EXPECT_NE(std::string(e.what()).find("[50, 1000]"), std::string::npos) << e.what();
    }
}

TEST(LoadScenario, ParseErrorCarriesLine) {
    try {
        load_scenario(kData / "invalid" / "syntax.toml");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("syntax.toml:3:"), std::string::npos) << e.what();
    }
}

TEST(LoadScenario, UnknownKeysRejected) {
    EXPECT_THROW(parse_scenario("name = \"x\"\ncolour = \"red\"\n"), ValidationError);
    EXPECT_THROW(parse_scenario("[plant]\nmass = 1.5\nwings = 2\n"), ValidationError);
    EXPECT_THROW(parse_scenario("[params]\nNOT_A_PARAM = 1\n"), ValidationError);
    EXPECT_THROW(parse_scenario("[[attacks]]\ntime = 1\ntype = \"laser\"\n"), ValidationError);
}

TEST(LoadScenario, MissingFileIsConfigError) {
    EXPECT_THROW(load_scenario(kData / "no_such_file.toml"), ConfigError);
}

TEST(LoadScenario, AttackTablesRoundTripIntoHeader) {
    const Scenario s = parse_scenario(R"(
duration = 5.0
[[attacks]]
time = 1.0
type = "spoof"
sensor = "gps_pos"
shape = "ramp"
slope = [0.1, 0.0, 0.0]
[[attacks]]
time = 2.0
type = "command"
kind = "PARAM_SET"
param = "ATC_RAT_PIT_I"
value = 0.2
)");
    ASSERT_EQ(s.attacks.size(), 2u);
    const json j = to_json(s);
    EXPECT_EQ(j["attacks"][0]["shape"], "ramp");
    EXPECT_DOUBLE_EQ(j["attacks"][0]["stop"].get<double>(), 5.0);
    EXPECT_EQ(j["attacks"][1]["param"], "ATC_RAT_PIT_I");
}

// -- running ---------------------------------------------------------------------

TEST(RunScenario, HoverHoldsPosition) {
    const RunResult r = run_scenario(load_scenario(kData / "hover.toml"));
    EXPECT_TRUE(r.report.passed);
    EXPECT_EQ(exit_code(r.report), 0);
    EXPECT_LT(r.report.final_position_error, 1e-6);
    EXPECT_EQ(r.report.end_reason, "duration");
    EXPECT_NEAR(r.report.end_time, 5.0, 1e-9);
}

TEST(RunScenario, StallDisarmsAtTwelveSeconds) {
    Scenario s = default_scenario();
    s.duration = 15.0;
    s.attacks.push_back({10.0, attack::StallAction{2.5}});
    const RunResult r = run_scenario(s);
    EXPECT_EQ(r.report.stage, safety::FailsafeStage::disarmed_min_thrust);
    bool seen = false;
    for (const auto& j : parsed(r.telemetry)) {
        if (j["type"] == "event" && j["kind"] == "failsafe") {
            EXPECT_NEAR(j["t"].get<double>(), 12.0, 0.01);
            seen = true;
        }
    }
    EXPECT_TRUE(seen);
}

TEST(RunScenario, DivergenceEndsRunAndExitsTwo) {
    const RunResult r = run_scenario(load_scenario(kData / "batch" / "03_diverge.toml"));
    EXPECT_TRUE(r.report.diverged);
    EXPECT_FALSE(r.report.passed);
    EXPECT_EQ(exit_code(r.report), 2);
    EXPECT_EQ(r.report.end_reason, "diverged");
}

TEST(RunScenario, ExpectationMismatchExitsOne) {
    Scenario s = load_scenario(kData / "hover.toml");
    s.expect.crash = true;
    const RunReport r = run_scenario(s).report;
    EXPECT_FALSE(r.passed);
    EXPECT_EQ(r.expectation_failures.size(), 1u);
    EXPECT_EQ(exit_code(r), 1);
}

TEST(RunScenario, GpsBiasShiftsVehicleByBias) {
    // Dual run: same scenario with and without a small constant GPS offset.
    // The filter follows the offset measurements, so the controller moves the
    // true vehicle by the opposite of the offset.
    const Vec3 bias{0.5, -0.3, 0.0};
    Scenario clean = default_scenario();
    clean.duration = 20.0;
    Scenario spoofed = clean;
    attack::SpoofProfile p;
    p.target = attack::SpoofTarget::gps_pos;
    p.shape = attack::SpoofShape::bias;
    p.bias = bias;
    p.start = 2.0;
    p.stop = 20.0;
    spoofed.attacks.push_back({2.0, p});

    const auto a = states(run_scenario(clean).telemetry);
    const auto b = states(run_scenario(spoofed).telemetry);
    ASSERT_EQ(a.size(), b.size());
    const Vec3 shift = vec(b.back()["pos"]) - vec(a.back()["pos"]);
    EXPECT_NEAR(shift.x, -bias.x, 0.02 * std::abs(bias.x));
    EXPECT_NEAR(shift.y, -bias.y, 0.02 * std::abs(bias.y));
    const Vec3 est_offset = vec(b.back()["est_pos"]) - vec(b.back()["pos"]);
    EXPECT_NEAR(est_offset.x, bias.x, 0.02 * std::abs(bias.x));
    EXPECT_EQ(b.back()["gate_rejects"], 0);
    // identical before the attack
    for (std::size_t i = 0; i < a.size() && a[i]["t"].get<double>() < 2.0; ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(RunScenario, ReplayReproducesReport) {
    const fs::path dir = scratch("replay");
    Scenario s = default_scenario();
    s.duration = 6.0;
    s.sensors.noise = {0.05, 0.005, 0.3, 0.3};
    s.attacks.push_back({2.0, attack::TorqueBiasAction{{0.05, 0, 0}, 2.0, 1.0}});
    const RunResult r = run_scenario(s, dir / "run.jsonl");
    EXPECT_EQ(report_from_file(dir / "run.jsonl"), r.report);
    EXPECT_EQ(report_from_lines(r.telemetry), r.report);
}

TEST(RunScenario, SeedOnlyChangesNoise) {
    Scenario s = default_scenario();
    s.duration = 2.0;
    s.sensors.noise = {0.05, 0.005, 0.3, 0.3};
    Scenario t = s;
    t.seed = 2;
    const auto a = parsed(run_scenario(s).telemetry);
    const auto b = parsed(run_scenario(t).telemetry);
    EXPECT_EQ(a.front()["config"], b.front()["config"]);
    EXPECT_EQ(a.front()["resolved_params"], b.front()["resolved_params"]);
    EXPECT_NE(a.front()["seed"], b.front()["seed"]);
    bool differs = false;
    for (std::size_t i = 1; i < std::min(a.size(), b.size()); ++i) differs = differs || a[i]["est_pos"] != b[i]["est_pos"];
    EXPECT_TRUE(differs);
}

TEST(RunScenario, SameSeedSameLog) {
    Scenario s = default_scenario();
    s.duration = 3.0;
    s.sensors.noise = {0.05, 0.005, 0.3, 0.3};
    EXPECT_EQ(run_scenario(s).telemetry, run_scenario(s).telemetry);
}

TEST(RunScenario, EveryFiredAttackLoggedOnce) {
    Scenario s = default_scenario();
    s.duration = 8.0;
    attack::CommandMessage reposition;
    reposition.kind = attack::CommandKind::do_reposition;
    reposition.position = {1, 0, -5};
    s.attacks.push_back({1.0, reposition});
    s.attacks.push_back({2.0, attack::LimitShiftAction{-0.02, 0.02}});
    s.attacks.push_back({3.0, attack::StallAction{0.5}});
    s.attacks.push_back({4.0, attack::TorqueBiasAction{{0.02, 0, 0}, 0.0, 0.5}});
    s.attacks.push_back({20.0, attack::StallAction{0.5}});  // after the end; never fires

    const RunResult r = run_scenario(s);
    std::multiset<int> indices;
    for (const auto& j : parsed(r.telemetry)) {
        if (j["type"] == "event" && j["kind"] == "attack") indices.insert(j["index"].get<int>());
    }
    EXPECT_EQ(indices, (std::multiset<int>{0, 1, 2, 3}));
    ASSERT_EQ(r.report.attacks.size(), 5u);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_TRUE(r.report.attacks[i].fired) << i;
    EXPECT_FALSE(r.report.attacks[4].fired);
}

TEST(RunScenario, DetachedAttackModuleMatchesClean) {
    Scenario s = default_scenario();
    s.duration = 3.0;
    Scenario detached = s;
    detached.attack_module = false;
    detached.attacks.push_back({1.0, attack::TorqueBiasAction{{0.3, 0, 0}, 0.0, 1.0}});
    const auto a = states(run_scenario(s).telemetry);
    const auto b = states(run_scenario(detached).telemetry);
    EXPECT_EQ(a, b);
}

// -- batch -----------------------------------------------------------------------

TEST(Batch, EmptyDirectoryPasses) {
    const BatchSummary b = run_batch(scratch("empty"));
    EXPECT_TRUE(b.rows.empty());
    EXPECT_EQ(b.exit_code, 0);
    EXPECT_EQ(summary_csv(b),
              "file,name,status,exit_code,final_position_error,rms_tracking_error,max_lean,crash,failsafe_stage,"
              "diverged,error\n");
}

TEST(Batch, DivergingScenarioFlaggedAndOthersStillRun) {
    const BatchSummary b = run_batch(kData / "batch", {2, std::nullopt, std::nullopt});
    ASSERT_EQ(b.rows.size(), 3u);
    EXPECT_EQ(b.rows[0].file, "01_hover.toml");
    EXPECT_EQ(b.rows[0].status, "pass");
    EXPECT_EQ(b.rows[1].status, "pass");
    EXPECT_EQ(b.rows[2].status, "diverged");
    EXPECT_EQ(b.rows[2].exit_code, 2);
    EXPECT_NE(b.exit_code, 0);
}

TEST(Batch, ConfigErrorsCollectedPerRow) {
    const BatchSummary b = run_batch(kData / "invalid");
    ASSERT_EQ(b.rows.size(), 3u);
    for (const auto& row : b.rows) {
        EXPECT_EQ(row.status, "config_error") << row.file;
        EXPECT_EQ(row.exit_code, kExitConfigError);
        EXPECT_FALSE(row.error.empty());
    }
    EXPECT_EQ(b.exit_code, kExitConfigError);
}

TEST(Batch, ParallelMatchesSerial) {
    const fs::path d1 = scratch("serial"), d2 = scratch("parallel");
    const BatchSummary a = run_batch(kData / "batch", {1, d1, std::nullopt});
    const BatchSummary b = run_batch(kData / "batch", {3, d2, std::nullopt});
    EXPECT_EQ(summary_csv(a), summary_csv(b));
    for (const char* stem : {"01_hover", "02_stall", "03_diverge"}) {
        std::ifstream fa(d1 / (std::string(stem) + ".jsonl")), fb(d2 / (std::string(stem) + ".jsonl"));
        ASSERT_TRUE(fa && fb) << stem;
        const std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
        EXPECT_FALSE(sa.empty());
        EXPECT_EQ(sa, sb) << stem;
    }
}

TEST(Batch, SeedOverrideApplied) {
    const BatchSummary b = run_batch(kData / "batch", {1, std::nullopt, 42});
    ASSERT_TRUE(b.rows[0].report);
    EXPECT_EQ(b.rows[0].report->seed, 42u);
}

TEST(Batch, CsvHasOneLinePerScenario) {
    const std::string csv = summary_csv(run_batch(kData / "batch"));
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    EXPECT_NE(csv.find("03_diverge.toml,diverge,diverged,2,"), std::string::npos) << csv;
}

TEST(Batch, MissingDirectoryIsConfigError) {
    EXPECT_THROW(run_batch(kData / "no_such_dir"), ConfigError);
}
