#include "quadsim/safety/safety.hpp"
#include "quadsim/sim/engine.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace quadsim;
using namespace quadsim::safety;
using nlohmann::json;

namespace {

constexpr double kDeg = kPi / 180.0;

SafetyInputs crashing() {
    SafetyInputs in;
    in.lean = 20 * kDeg;
    in.accel = 1.0;
    in.thrust_error = 40 * kDeg;
    in.horizontal_speed = 2.0;
    return in;
}

SafetyStatus hold(const SafetyInputs& in, double seconds, SafetyStatus st = {}) {
    const int n = static_cast<int>(std::llround(seconds / 0.1));
    for (int i = 0; i < n; ++i) st = crash_check(in, st, 0.1);
    return st;
}

}  // namespace

TEST(CrashCheck, SustainedConditionsConfirm) {
    const SafetyStatus st = hold(crashing(), 2.1);
    EXPECT_TRUE(st.crash_confirmed);
    ASSERT_EQ(st.actions.size(), 1u);
}

TEST(CrashCheck, LowLeanNeverCounts) {
    SafetyInputs in = crashing();
    in.lean = 10 * kDeg;
    const SafetyStatus st = hold(in, 3.0);
    EXPECT_FALSE(st.crash_confirmed);
    EXPECT_DOUBLE_EQ(st.crash_counter, 0.0);
}

TEST(CrashCheck, InterruptionResetsCounter) {
    SafetyStatus st = hold(crashing(), 1.9);
    EXPECT_NEAR(st.crash_counter, 1.9, 1e-9);
    SafetyInputs upright = crashing();
    upright.lean = 5 * kDeg;
    st = crash_check(upright, st, 0.1);
    EXPECT_DOUBLE_EQ(st.crash_counter, 0.0);
    st = hold(crashing(), 1.9, st);
    EXPECT_FALSE(st.crash_confirmed);
}

TEST(CrashCheck, TwentyChecksAtTenHertz) {
    SafetyStatus st;
    for (int i = 1; i <= 19; ++i) {
        st = crash_check(crashing(), st, 0.1);
        ASSERT_FALSE(st.crash_confirmed) << i;
        EXPECT_NEAR(st.crash_counter, 0.1 * i, 1e-9);
    }
    st = crash_check(crashing(), st, 0.1);
    EXPECT_TRUE(st.crash_confirmed);
}

TEST(CrashCheck, ConfirmationLatches) {
    SafetyStatus st = hold(crashing(), 2.0);
    ASSERT_TRUE(st.crash_confirmed);
    SafetyInputs ok = crashing();
    ok.lean = 0.0;
    st = crash_check(ok, st, 0.1);
    EXPECT_TRUE(st.crash_confirmed);
    EXPECT_EQ(st.actions.size(), 1u);
}

TEST(CrashConditions, FlagGating) {
    const auto base = crashing();
    EXPECT_TRUE(crash_conditions_hold(base));
    auto f = base;
    f.armed = false;
    EXPECT_FALSE(crash_conditions_hold(f));
    f = base;
    f.crash_check_enabled = false;
    EXPECT_FALSE(crash_conditions_hold(f));
    f = base;
    f.standby = true;
    EXPECT_FALSE(crash_conditions_hold(f));
    f = base;
    f.forced_flight = true;
    EXPECT_FALSE(crash_conditions_hold(f));
    f = base;
    f.autorotation = true;
    EXPECT_FALSE(crash_conditions_hold(f));
    f = base;
    f.angle_mode = false;
    EXPECT_FALSE(crash_conditions_hold(f));
    f.flipping = true;
    EXPECT_TRUE(crash_conditions_hold(f));
}

TEST(CrashConditions, BoundariesBothSides) {
    const double eps = 1e-6;
    auto with = [](auto set) {
        auto in = crashing();
        set(in);
        return crash_conditions_hold(in);
    };
    // lean: at least 15 deg
    EXPECT_FALSE(with([&](SafetyInputs& i) { i.lean = 15 * kDeg - eps; }));
    EXPECT_TRUE(with([&](SafetyInputs& i) { i.lean = 15 * kDeg; }));
    EXPECT_TRUE(with([&](SafetyInputs& i) { i.lean = 15 * kDeg + eps; }));
    // accel: below 3
    EXPECT_TRUE(with([&](SafetyInputs& i) { i.accel = 3 - eps; }));
    EXPECT_FALSE(with([&](SafetyInputs& i) { i.accel = 3; }));
    EXPECT_FALSE(with([&](SafetyInputs& i) { i.accel = 3 + eps; }));
    // thrust error: exceeds 30 deg
    EXPECT_FALSE(with([&](SafetyInputs& i) { i.thrust_error = 30 * kDeg - eps; }));
    EXPECT_FALSE(with([&](SafetyInputs& i) { i.thrust_error = 30 * kDeg; }));
    EXPECT_TRUE(with([&](SafetyInputs& i) { i.thrust_error = 30 * kDeg + eps; }));
    // speed: less than 10
    EXPECT_TRUE(with([&](SafetyInputs& i) { i.horizontal_speed = 10 - eps; }));
    EXPECT_FALSE(with([&](SafetyInputs& i) { i.horizontal_speed = 10; }));
    EXPECT_FALSE(with([&](SafetyInputs& i) { i.horizontal_speed = 10 + eps; }));
}

TEST(Failsafe, Examples) {
    auto stage_after_gap = [](double gap) {
        SafetyStatus st;
        loop_ran(st, 10.0);
        for (double t = 10.0; t <= 10.0 + gap + 1e-12; t += 0.0025) st = failsafe_check(st, t, true, true).status;
        return st.stage;
    };
    EXPECT_EQ(stage_after_gap(1.0), FailsafeStage::none);
    EXPECT_EQ(stage_after_gap(2.5), FailsafeStage::disarmed_min_thrust);
    EXPECT_EQ(stage_after_gap(3.5), FailsafeStage::shutdown);
}

TEST(Failsafe, ThresholdIsStrict) {
    SafetyStatus st;
    loop_ran(st, 0.0);
    EXPECT_EQ(failsafe_check(st, 2.0, true, true).action, FailsafeAction::none);
    EXPECT_EQ(failsafe_check(st, 2.0 + 1e-6, true, true).action, FailsafeAction::min_thrust_disarm);
}

TEST(Failsafe, RequiresEnabledAndMotorsActive) {
    SafetyStatus st;
    EXPECT_EQ(failsafe_check(st, 5.0, false, true).status.stage, FailsafeStage::none);
    EXPECT_EQ(failsafe_check(st, 5.0, true, false).status.stage, FailsafeStage::none);
}

TEST(Failsafe, StagesNeverRegress) {
    SafetyStatus st;
    loop_ran(st, 0.0);
    FailsafeStage prev = FailsafeStage::none;
    for (int k = 0; k < 2000; ++k) {
        const double t = k * 0.0025;
        if (k == 1500) loop_ran(st, t);
        st = failsafe_check(st, t, true, true).status;
        EXPECT_GE(static_cast<int>(st.stage), static_cast<int>(prev));
        prev = st.stage;
    }
    EXPECT_EQ(st.stage, FailsafeStage::shutdown);
}

TEST(Failsafe, StageNames) {
    for (auto s : {FailsafeStage::none, FailsafeStage::disarmed_min_thrust, FailsafeStage::shutdown}) {
        EXPECT_EQ(failsafe_stage_from_string(to_string(s)), s);
    }
    EXPECT_FALSE(failsafe_stage_from_string("panic"));
}

TEST(ThrustVectorError, Angles) {
    EXPECT_NEAR(thrust_vector_error({}, {}), 0.0, 1e-15);
    EXPECT_NEAR(thrust_vector_error(quat_from_euler({0.3, 0, 0}), {}), 0.3, 1e-12);
    // yaw does not move the thrust axis
    EXPECT_NEAR(thrust_vector_error(quat_from_euler({0, 0, 2.0}), {}), 0.0, 1e-7);
}

TEST(LinkLost, Timeout) {
    EXPECT_FALSE(link_lost(std::nullopt, 100.0, 3.0));
    EXPECT_FALSE(link_lost(1.0, 4.0, 3.0));
    EXPECT_TRUE(link_lost(1.0, 4.1, 3.0));
}

// -- in the engine --------------------------------------------------------------

namespace {

std::vector<json> records(const std::vector<std::string>& lines) {
    std::vector<json> out;
    for (const auto& l : lines) out.push_back(json::parse(l));
    return out;
}

}  // namespace

TEST(EngineSafety, MotorsZeroAfterCrash) {
    sim::Scenario s = sim::default_scenario();
    s.duration = 15.0;
    s.attacks.push_back({1.0, attack::TorqueBiasAction{{0.5, 0, 0}, 0.0, 1.5}});
    sim::Engine e(s);
    e.run();
    bool crashed = false;
    int after = 0;
    for (const auto& j : records(e.telemetry())) {
        if (j["type"] == "event" && j["kind"] == "crash") crashed = true;
        if (crashed && j["type"] == "state") {
            for (double m : j["motors"]) EXPECT_DOUBLE_EQ(m, 0.0) << j["t"];
            ++after;
        }
    }
    EXPECT_TRUE(crashed);
    EXPECT_GT(after, 10);
}

TEST(EngineSafety, MotorsZeroAfterShutdown) {
    sim::Scenario s = sim::default_scenario();
    s.duration = 20.0;
    s.attacks.push_back({10.0, attack::StallAction{3.5}});
    sim::Engine e(s);
    e.run();
    EXPECT_EQ(e.safety_status().stage, FailsafeStage::shutdown);
    EXPECT_EQ(e.end_reason(), sim::EndReason::shutdown);
    bool shut = false;
    for (const auto& j : records(e.telemetry())) {
        if (j["type"] == "event" && j["kind"] == "failsafe" && j["stage"] == "shutdown") {
            shut = true;
            EXPECT_NEAR(j["t"].get<double>(), 13.0, 0.01);
        }
        if (shut && j["type"] == "state") {
            for (double m : j["motors"]) EXPECT_DOUBLE_EQ(m, 0.0);
        }
    }
    EXPECT_TRUE(shut);
}

TEST(EngineSafety, StallDisarmTimedAtTwelveSeconds) {
    sim::Scenario s = sim::default_scenario();
    s.duration = 20.0;
    s.attacks.push_back({10.0, attack::StallAction{2.5}});
    sim::Engine e(s);
    e.run();
    double when = -1.0;
    for (const auto& j : records(e.telemetry())) {
        if (j["type"] == "event" && j["kind"] == "failsafe") when = j["t"].get<double>();
    }
    EXPECT_NEAR(when, 12.0, 0.01);
    EXPECT_EQ(e.safety_status().stage, FailsafeStage::disarmed_min_thrust);
    EXPECT_FALSE(e.armed());
}

TEST(EngineSafety, WatchdogDisabledIgnoresStall) {
    sim::Scenario s = sim::default_scenario();
    s.duration = 15.0;
    s.params["FS_WATCHDOG_ENABLE"] = 0.0;
    s.attacks.push_back({5.0, attack::StallAction{3.5}});
    sim::Engine e(s);
    e.run();
    EXPECT_EQ(e.safety_status().stage, FailsafeStage::none);
}

TEST(EngineSafety, LinkLossReturnsHome) {
    sim::Scenario s = sim::default_scenario();
    s.duration = 12.0;
    s.params["FS_GCS_ENABLE"] = 1.0;
    attack::CommandMessage hb;
    hb.kind = attack::CommandKind::heartbeat;
    s.attacks.push_back({1.0, hb});
    attack::CommandMessage home;
    home.kind = attack::CommandKind::set_home;
    home.position = {2, 0, -5};
    s.attacks.push_back({1.5, home});
    sim::Engine e(s);
    e.run();
    bool lost = false;
    for (const auto& j : records(e.telemetry())) {
        if (j["type"] == "event" && j["kind"] == "link_loss") {
            lost = true;
            EXPECT_GT(j["t"].get<double>(), 4.0);
        }
    }
    EXPECT_TRUE(lost);
    EXPECT_EQ(e.position_target(), (Vec3{2, 0, -5}));
}
