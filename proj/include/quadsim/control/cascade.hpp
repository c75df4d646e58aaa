#pragma once

#include "quadsim/control/mixer.hpp"
#include "quadsim/control/pid.hpp"
#include "quadsim/core/params.hpp"
#include "quadsim/core/quaternion.hpp"

#include <array>

namespace quadsim::control {

/// Tilt beyond which throttle compensation is refused (cos > 0.45).
inline constexpr double kMaxCompensatedTilt = 63.0 * kPi / 180.0;

struct SqrtControllerParams {
    double omega_max{0.501};
    double epsilon{1e-3};
    double threshold{0.5};
};

struct RateLimits {
    double rate_y_max{1.5};
    double slew_yaw{1.047};
    double rate_rp_max{3.5};
    double accel_shape_max{19.2};
};

struct CascadeGains {
    PidGains pos_xy{};
    PidGains vel_xy{};
    PidGains pos_z{};
    PidGains vel_z{};
    PidGains acc_z{};
    std::array<PidGains, 3> rate{};
    Vec3 att_kp{4.5, 4.5, 1.0};
    SqrtControllerParams sqrt_ctrl{};
    RateLimits limits{};
    double accel_xy_max{5.0};
    double lean_max{0.5236};
    double hover_throttle{0.5};
    FrameGeometry geometry{FrameGeometry::quad_x};
    OutputLimits mixer_limits{0.0, 1.0};
};

/// All gains plus the persistent memory of every loop.
struct CascadeState {
    CascadeGains gains{};

    PidState pos_x{}, pos_y{};
    PidState vel_x{}, vel_y{};
    PidState pos_z{}, vel_z{}, acc_z{};
    std::array<PidState, 3> rate{};

    /// Rate target from the previous attitude cycle (input shaping memory).
    Vec3 prev_rate_target{};
    /// Yaw target from the previous slew step.
    double prev_yaw_target{0.0};
    /// Gates every kFF term (guided/auto targets only).
    bool feed_forward_enabled{true};
};

/// Reads gains and limits from the parameter table.
CascadeGains gains_from_params(const ParamRegistry& reg, FrameGeometry geometry = FrameGeometry::quad_x);

/// Relative gap between the linear and square-root branches at the
/// activation threshold; must stay below 5% for a continuous response.
double sqrt_branch_mismatch(const SqrtControllerParams& p);

// -- horizontal -------------------------------------------------------------

struct HorizontalPositionOutput {
    Vec3 desired_position{};  ///< p_t - p_off (x, y)
    Vec3 velocity_demand{};   ///< x, y; z unused
};

HorizontalPositionOutput horizontal_position_step(CascadeState& cs, const Vec3& target, const Vec3& offset,
                                                  const Vec3& current, double dt);

struct HorizontalVelocityOutput {
    Vec3 desired_accel{};  ///< PID output before offsets and constraint
    Vec3 accel_target{};   ///< constrained to +-accel_xy_max per axis
};

HorizontalVelocityOutput horizontal_velocity_step(CascadeState& cs, const Vec3& target_velocity,
                                                  const Vec3& velocity_offset, const Vec3& current_velocity,
                                                  const Vec3& accel_offset, double dt);

// -- vertical (NED, down positive) ------------------------------------------

struct VerticalTerms {
    double position{0.0};
    double velocity{0.0};
    double accel{0.0};
};

struct VerticalOutput {
    double desired_position{0.0};  ///< p_t - (p_off + p_terrain)
    double velocity_demand{0.0};   ///< position-loop output
    double velocity_target{0.0};   ///< velocity-loop setpoint after offsets
    double desired_accel{0.0};     ///< velocity-loop output
    double accel_target{0.0};      ///< desired + feed-forward + offset + terrain
    double thrust_in{0.0};         ///< in [-T_hover, 1 - T_hover]
};

/// Position stage (runs at the position-loop rate).
void vertical_position_stage(CascadeState& cs, VerticalOutput& out, const VerticalTerms& targets,
                             const VerticalTerms& offsets, const VerticalTerms& terrain, double measured_position,
                             double dt);
/// Velocity stage (velocity-loop rate).
void vertical_velocity_stage(CascadeState& cs, VerticalOutput& out, const VerticalTerms& targets,
                             const VerticalTerms& offsets, const VerticalTerms& terrain, double measured_velocity,
                             double dt);
/// Acceleration-to-thrust stage (attitude-loop rate). The acceleration error
/// is taken along the thrust (up) direction so that a demand for upward
/// acceleration yields positive thrust.
void vertical_accel_stage(CascadeState& cs, VerticalOutput& out, const VerticalTerms& targets,
                          const VerticalTerms& offsets, const VerticalTerms& terrain, double measured_accel, double dt,
                          bool freeze_integrator = false);

/// All three stages in one call.
VerticalOutput vertical_cascade_step(CascadeState& cs, const VerticalTerms& targets, const VerticalTerms& offsets,
                                     const VerticalTerms& terrain, const VerticalTerms& measured, double dt);

struct ThrottleResult {
    double throttle{0.0};
    /// Set when the tilt exceeded kMaxCompensatedTilt and was clamped.
    bool tilt_limited{false};
    /// Set when the compensated throttle left [0, 1].
    bool saturated{false};
};

/// T_out = (T_hover + T_in) / cos(tilt), clamped to [0, 1].
ThrottleResult thrust_to_throttle(double thrust_in, double hover_throttle, double tilt);

// -- attitude ---------------------------------------------------------------

/// Small-angle lean targets from a horizontal acceleration expressed in the
/// heading frame (x forward, y right): pitch = -a_x / g, roll = a_y / g.
EulerAngles accel_to_lean_angles(const Vec3& accel, double g, double lean_limit);

/// NED horizontal vector rotated into the heading frame for yaw `yaw`.
Vec3 ned_to_heading(const Vec3& v, double yaw);

struct YawTarget {
    double yaw{0.0};
    double yaw_rate{0.0};
};

YawTarget yaw_slew(CascadeState& cs, double yaw_cmd, double yaw_rate_cmd, double dt);

/// Rotation vector of q_target * q_body^-1 (NED frame), angle in [0, pi].
Vec3 attitude_error(const Quaternion& q_target, const Quaternion& q_body);

/// Proportional (or square-root above the activation threshold) rate demand
/// before shaping.
Vec3 attitude_rate_demand(const Vec3& kp, const SqrtControllerParams& sq, const Vec3& error);

/// Rate demand followed by input shaping and rate clamps; updates the shaping
/// memory in `cs`.
Vec3 attitude_p(CascadeState& cs, const Vec3& error, double dt);

/// Body-rate PID with feed-forward; each axis clamped to [-0.5, 0.5].
Vec3 rate_pid(CascadeState& cs, const Vec3& rate_target, const Vec3& rate_measured, double dt,
              bool freeze_integrators = false);

}  // namespace quadsim::control
