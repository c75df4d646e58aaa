#include "quadsim/safety/safety.hpp"

#include <algorithm>
#include <cmath>

namespace quadsim::safety {

namespace {
// absorbs rounding in the summed tick lengths (20 x 0.1 s)
constexpr double kTimeSlack = 1e-9;
}

std::string_view to_string(FailsafeStage s) {
    switch (s) {
        case FailsafeStage::none: return "none";
        case FailsafeStage::disarmed_min_thrust: return "disarmed_min_thrust";
        case FailsafeStage::shutdown: return "shutdown";
    }
    return "?";
}

std::optional<FailsafeStage> failsafe_stage_from_string(std::string_view s) {
    for (auto st : {FailsafeStage::none, FailsafeStage::disarmed_min_thrust, FailsafeStage::shutdown}) {
        if (to_string(st) == s) return st;
    }
    return std::nullopt;
}

bool crash_conditions_hold(const SafetyInputs& in, const CrashThresholds& th) {
    return in.armed && in.crash_check_enabled &&
           !in.standby && !in.forced_flight &&
           (in.angle_mode || in.flipping) &&
           !in.autorotation &&
           in.lean >= th.lean_min &&
           in.accel < th.accel_max &&
           in.thrust_error > th.thrust_error_min &&
           in.horizontal_speed < th.speed_max;
}

SafetyStatus crash_check(const SafetyInputs& in, SafetyStatus st, double dt, const CrashThresholds& th) {
    if (st.crash_confirmed) {
        return st;
    }
    if (!crash_conditions_hold(in, th)) {
        st.crash_counter = 0.0;
        return st;
    }
    st.crash_counter += dt;
    if (st.crash_counter >= th.persistence - kTimeSlack) {
        st.crash_confirmed = true;
        st.actions.push_back({in.time, "crash confirmed: disarm"});
    }
    return st;
}

FailsafeOutcome failsafe_check(SafetyStatus st, double now, bool motors_active, bool enabled,
                               const WatchdogLimits& lim) {
    FailsafeOutcome out{std::move(st), FailsafeAction::none};
    SafetyStatus& s = out.status;
    const double gap = now - s.last_loop_time;
    if (s.stage == FailsafeStage::none) {
        if (enabled && motors_active && gap > lim.stall_gap + kTimeSlack) {
            s.stage = FailsafeStage::disarmed_min_thrust;
            s.actions.push_back({now, "loop stall: minimum thrust, disarm"});
            out.action = FailsafeAction::min_thrust_disarm;
        }
    } else if (s.stage == FailsafeStage::disarmed_min_thrust) {
        if (gap > lim.stall_gap + lim.shutdown_after + kTimeSlack) {
            s.stage = FailsafeStage::shutdown;
            s.actions.push_back({now, "loop stall persists: motor shutdown"});
            out.action = FailsafeAction::shutdown;
        }
    }
    return out;
}

void loop_ran(SafetyStatus& st, double now) { st.last_loop_time = now; }

double thrust_vector_error(const Quaternion& target, const Quaternion& body) {
    const Vec3 up{0.0, 0.0, -1.0};
    const Vec3 a = rotate(target, up);
    const Vec3 b = rotate(body, up);
    return std::acos(std::clamp(dot(a, b), -1.0, 1.0));
}

bool link_lost(std::optional<double> last_heartbeat, double now, double timeout) {
    return last_heartbeat.has_value() && now - *last_heartbeat > timeout;
}

}  // namespace quadsim::safety
