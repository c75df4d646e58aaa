#pragma once

#include "quadsim/core/quaternion.hpp"

#include <optional>
#include <string>
#include <vector>

namespace quadsim::safety {

struct CrashThresholds {
    double lean_min{15.0 * kPi / 180.0};          ///< lean >= this
    double accel_max{3.0};                        ///< accel < this
    double thrust_error_min{30.0 * kPi / 180.0};  ///< error > this
    double speed_max{10.0};                       ///< horizontal speed < this
    double persistence{2.0};                      ///< seconds
};

struct SafetyInputs {
    bool armed{true};
    bool crash_check_enabled{true};
    bool standby{false};
    bool forced_flight{false};
    bool angle_mode{true};
    bool flipping{false};
    bool autorotation{false};
    double lean{0.0};          ///< rad
    double accel{0.0};         ///< m/s^2
    double thrust_error{0.0};  ///< rad
    double horizontal_speed{0.0};
    double time{0.0};
};

enum class FailsafeStage { none = 0, disarmed_min_thrust = 1, shutdown = 2 };

std::string_view to_string(FailsafeStage s);
std::optional<FailsafeStage> failsafe_stage_from_string(std::string_view s);

struct SafetyAction {
    double time{0.0};
    std::string what;
};

struct SafetyStatus {
    double crash_counter{0.0};
    bool crash_confirmed{false};
    FailsafeStage stage{FailsafeStage::none};
    double last_loop_time{0.0};
    std::vector<SafetyAction> actions;
};

/// All eight crash conditions at once.
bool crash_conditions_hold(const SafetyInputs& in, const CrashThresholds& th = {});

/// Persistence counter in seconds; confirmation is latched and logged.
SafetyStatus crash_check(const SafetyInputs& in, SafetyStatus st, double dt, const CrashThresholds& th = {});

struct WatchdogLimits {
    double stall_gap{2.0};       ///< gap > this disarms at minimum thrust
    double shutdown_after{1.0};  ///< further gap before full shutdown
};

enum class FailsafeAction { none, min_thrust_disarm, shutdown };

struct FailsafeOutcome {
    SafetyStatus status;
    FailsafeAction action{FailsafeAction::none};
};

/// Loop-stall watchdog. Stages only advance.
FailsafeOutcome failsafe_check(SafetyStatus st, double now, bool motors_active, bool enabled,
                               const WatchdogLimits& lim = {});

/// Records that the main loop executed at `now`.
void loop_ran(SafetyStatus& st, double now);

/// Angle between the desired thrust axis and the body thrust axis.
double thrust_vector_error(const Quaternion& target, const Quaternion& body);

/// True once a heartbeat has been seen and none has arrived for more than
/// `timeout` seconds.
bool link_lost(std::optional<double> last_heartbeat, double now, double timeout);

}  // namespace quadsim::safety
