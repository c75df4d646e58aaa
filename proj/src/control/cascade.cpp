#include "quadsim/control/cascade.hpp"

#include <algorithm>
#include <cmath>

namespace quadsim::control {

namespace {

double gate_ff(const CascadeState& cs, double target) { return cs.feed_forward_enabled ? target : 0.0; }

PidGains pid_from(const ParamRegistry& r, std::string_view p, std::string_view i, std::string_view d,
                  std::string_view imax, OutputLimits limits) {
    PidGains g;
    g.kp = r.get(p);
    g.ki = r.get(i);
    g.kd = r.get(d);
    g.imax = r.get(imax);
    g.limits = limits;
    return g;
}

}  // namespace

CascadeGains gains_from_params(const ParamRegistry& r, FrameGeometry geometry) {
    using namespace param;
    CascadeGains g;

    const double vxy = r.get(kPosXYVelMax);
    g.pos_xy = pid_from(r, kPosXYP, kPosXYI, kPosXYD, kPosXYImax, {-vxy, vxy});
    g.vel_xy = pid_from(r, kVelXYP, kVelXYI, kVelXYD, kVelXYImax, {});
    g.vel_xy.kff = r.get(kVelXYFF);
    g.accel_xy_max = r.get(kAccXYMax);

    const double vz = r.get(kPosZVelMax);
    g.pos_z = pid_from(r, kPosZP, kPosZI, kPosZD, kPosZImax, {-vz, vz});
    const double az = r.get(kVelZAccMax);
    g.vel_z = pid_from(r, kVelZP, kVelZI, kVelZD, kVelZImax, {-az, az});
    g.hover_throttle = r.get(kThrustHover);
    g.acc_z = pid_from(r, kAccZP, kAccZI, kAccZD, kAccZImax, {-g.hover_throttle, 1.0 - g.hover_throttle});

    const OutputLimits torque{-0.5, 0.5};
    g.rate[0] = pid_from(r, kRatRollP, kRatRollI, kRatRollD, kRatRollImax, torque);
    g.rate[0].kff = r.get(kRatRollFF);
    g.rate[1] = pid_from(r, kRatPitchP, kRatPitchI, kRatPitchD, kRatPitchImax, torque);
    g.rate[1].kff = r.get(kRatPitchFF);
    g.rate[2] = pid_from(r, kRatYawP, kRatYawI, kRatYawD, kRatYawImax, torque);
    g.rate[2].kff = r.get(kRatYawFF);

    g.att_kp = {r.get(kAngRollP), r.get(kAngPitchP), r.get(kAngYawP)};
    g.sqrt_ctrl = {r.get(kSqrtOmegaMax), r.get(kSqrtEpsilon), r.get(kSqrtThreshold)};
    g.limits = {r.get(kRateYMax), r.get(kSlewYaw), r.get(kRateRPMax), r.get(kAccelShapeMax)};
    g.lean_max = r.get(kAngleMax);
    g.geometry = geometry;
    g.mixer_limits = {r.get(kMotOutMin), r.get(kMotOutMax)};
    return g;
}

double sqrt_branch_mismatch(const SqrtControllerParams& p) {
    return std::abs(std::sqrt(p.omega_max / (p.threshold + p.epsilon)) - 1.0);
}

HorizontalPositionOutput horizontal_position_step(CascadeState& cs, const Vec3& target, const Vec3& offset,
                                                  const Vec3& current, double dt) {
    HorizontalPositionOutput out;
    out.desired_position = {target.x - offset.x, target.y - offset.y, 0.0};
    const PidGains& g = cs.gains.pos_xy;
    const auto px = pid_step(g, cs.pos_x, target.x - current.x, gate_ff(cs, target.x), dt);
    const auto py = pid_step(g, cs.pos_y, target.y - current.y, gate_ff(cs, target.y), dt);
    cs.pos_x = px.state;
    cs.pos_y = py.state;
    out.velocity_demand = {px.output, py.output, 0.0};
    return out;
}

HorizontalVelocityOutput horizontal_velocity_step(CascadeState& cs, const Vec3& target_velocity,
                                                  const Vec3& velocity_offset, const Vec3& current_velocity,
                                                  const Vec3& accel_offset, double dt) {
    (void)velocity_offset;  // only shifts the reported desired velocity; the error uses the target
    HorizontalVelocityOutput out;
    const PidGains& g = cs.gains.vel_xy;
    const auto vx = pid_step(g, cs.vel_x, target_velocity.x - current_velocity.x, gate_ff(cs, target_velocity.x), dt);
    const auto vy = pid_step(g, cs.vel_y, target_velocity.y - current_velocity.y, gate_ff(cs, target_velocity.y), dt);
    cs.vel_x = vx.state;
    cs.vel_y = vy.state;
    out.desired_accel = {vx.output, vy.output, 0.0};
    const double lim = cs.gains.accel_xy_max;
    out.accel_target = {std::clamp(vx.output + accel_offset.x, -lim, lim),
                        std::clamp(vy.output + accel_offset.y, -lim, lim), 0.0};
    return out;
}

void vertical_position_stage(CascadeState& cs, VerticalOutput& out, const VerticalTerms& targets,
                             const VerticalTerms& offsets, const VerticalTerms& terrain, double measured_position,
                             double dt) {
    out.desired_position = targets.position - (offsets.position + terrain.position);
    const auto r = pid_step(cs.gains.pos_z, cs.pos_z, targets.position - measured_position,
                            gate_ff(cs, targets.position), dt);
    cs.pos_z = r.state;
    out.velocity_demand = r.output;
}

void vertical_velocity_stage(CascadeState& cs, VerticalOutput& out, const VerticalTerms& targets,
                             const VerticalTerms& offsets, const VerticalTerms& terrain, double measured_velocity,
                             double dt) {
    out.velocity_target = out.velocity_demand + targets.velocity - (offsets.velocity + terrain.velocity);
    const auto r = pid_step(cs.gains.vel_z, cs.vel_z, out.velocity_target - measured_velocity,
                            gate_ff(cs, out.velocity_target), dt);
    cs.vel_z = r.state;
    out.desired_accel = r.output;
}

void vertical_accel_stage(CascadeState& cs, VerticalOutput& out, const VerticalTerms& targets,
                          const VerticalTerms& offsets, const VerticalTerms& terrain, double measured_accel, double dt,
                          bool freeze_integrator) {
    out.accel_target = out.desired_accel + targets.accel + offsets.accel + terrain.accel;
    // down-positive error flipped into the thrust direction
    const double error_up = measured_accel - out.accel_target;
    const auto r = pid_step(cs.gains.acc_z, cs.acc_z, error_up, gate_ff(cs, -out.accel_target), dt,
                            freeze_integrator);
    cs.acc_z = r.state;
    out.thrust_in = r.output;
}

VerticalOutput vertical_cascade_step(CascadeState& cs, const VerticalTerms& targets, const VerticalTerms& offsets,
                                     const VerticalTerms& terrain, const VerticalTerms& measured, double dt) {
    VerticalOutput out;
    vertical_position_stage(cs, out, targets, offsets, terrain, measured.position, dt);
    vertical_velocity_stage(cs, out, targets, offsets, terrain, measured.velocity, dt);
    vertical_accel_stage(cs, out, targets, offsets, terrain, measured.accel, dt);
    return out;
}

ThrottleResult thrust_to_throttle(double thrust_in, double hover_throttle, double tilt) {
    ThrottleResult r;
    double a = std::abs(tilt);
    if (a > kMaxCompensatedTilt) {
        a = kMaxCompensatedTilt;
        r.tilt_limited = true;
    }
    const double raw = (hover_throttle + thrust_in) / std::cos(a);
    r.throttle = std::clamp(raw, 0.0, 1.0);
    r.saturated = r.throttle != raw;
    return r;
}

EulerAngles accel_to_lean_angles(const Vec3& accel, double g, double lean_limit) {
    EulerAngles e;
    e.pitch = std::clamp(-accel.x / g, -lean_limit, lean_limit);
    e.roll = std::clamp(accel.y / g, -lean_limit, lean_limit);
    return e;
}

Vec3 ned_to_heading(const Vec3& v, double yaw) {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    return {c * v.x + s * v.y, -s * v.x + c * v.y, v.z};
}

YawTarget yaw_slew(CascadeState& cs, double yaw_cmd, double yaw_rate_cmd, double dt) {
    const RateLimits& l = cs.gains.limits;
    YawTarget t;
    t.yaw_rate = std::clamp(yaw_rate_cmd, -l.rate_y_max, l.rate_y_max);
    const double step_max = l.slew_yaw * dt;
    const double step = std::clamp(wrap_pi(yaw_cmd - cs.prev_yaw_target), -step_max, step_max);
    t.yaw = wrap_pi(cs.prev_yaw_target + step);
    cs.prev_yaw_target = t.yaw;
    return t;
}

Vec3 attitude_error(const Quaternion& q_target, const Quaternion& q_body) {
    return rotation_vector(quat_mul(q_target, inverse(q_body)));
}

Vec3 attitude_rate_demand(const Vec3& kp, const SqrtControllerParams& sq, const Vec3& error) {
    const Vec3 linear = hadamard(kp, error);
    const double mag = norm(error);
    if (mag <= sq.threshold) {
        return linear;
    }
    return linear * std::sqrt(sq.omega_max / (mag + sq.epsilon));
}

Vec3 attitude_p(CascadeState& cs, const Vec3& error, double dt) {
    const RateLimits& l = cs.gains.limits;
    const Vec3 raw = attitude_rate_demand(cs.gains.att_kp, cs.gains.sqrt_ctrl, error);
    const double dmax = l.accel_shape_max * dt;
    Vec3 w;
    for (int i = 0; i < 3; ++i) {
        w[i] = std::clamp(raw[i], cs.prev_rate_target[i] - dmax, cs.prev_rate_target[i] + dmax);
    }
    w.x = std::clamp(w.x, -l.rate_rp_max, l.rate_rp_max);
    w.y = std::clamp(w.y, -l.rate_rp_max, l.rate_rp_max);
    w.z = std::clamp(w.z, -l.rate_y_max, l.rate_y_max);
    cs.prev_rate_target = w;
    return w;
}

Vec3 rate_pid(CascadeState& cs, const Vec3& rate_target, const Vec3& rate_measured, double dt,
              bool freeze_integrators) {
    Vec3 tau;
    for (int i = 0; i < 3; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const auto r = pid_step(cs.gains.rate[idx], cs.rate[idx], rate_target[i] - rate_measured[i],
                                gate_ff(cs, rate_target[i]), dt, freeze_integrators);
        cs.rate[idx] = r.state;
        tau[i] = r.output;
    }
    return tau;
}

}  // namespace quadsim::control
