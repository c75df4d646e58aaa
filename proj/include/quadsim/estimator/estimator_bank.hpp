#pragma once

#include "quadsim/core/quaternion.hpp"
#include "quadsim/estimator/axis_filter.hpp"

#include <array>
#include <optional>

namespace quadsim::estimator {

enum Axis : int { north = 0, east = 1, down = 2 };

/// Gyro integration with a complementary accelerometer tilt correction.
/// Each step rotates the estimate by `gain` of the angle between measured
/// and predicted gravity; yaw is never corrected.
Quaternion attitude_step(const Quaternion& q, const Vec3& gyro, const Vec3& accel_body, double dt, double gain);

struct EstimatorBank {
    std::array<AxisFilter, 3> axes{};
    Quaternion attitude{};
    /// When set the attitude estimate is taken from the reference supplied to
    /// step_attitude instead of the complementary filter.
    bool attitude_passthrough{false};
    double gate_threshold{25.0};
    bool gate_enabled{true};

    Vec3 position() const { return {axes[0].x[0], axes[1].x[0], axes[2].x[0]}; }
    Vec3 velocity() const { return {axes[0].x[1], axes[1].x[1], axes[2].x[1]}; }

    std::optional<double> gate() const {
        return gate_enabled ? std::optional<double>(gate_threshold) : std::nullopt;
    }
};

/// Initializes every axis at the given position/velocity with covariance
/// diag(pos_var, vel_var).
EstimatorBank make_bank(const Vec3& position, const Vec3& velocity, const Quaternion& attitude, double pos_var,
                        double vel_var);

/// NED linear acceleration implied by a body specific-force reading and an
/// attitude estimate (gravity removed).
Vec3 linear_accel_ned(const Quaternion& attitude, const Vec3& accel_body, double g);

void step_attitude(EstimatorBank& bank, const Vec3& gyro, const Vec3& accel_body, double dt, double gain,
                   const Quaternion& passthrough_reference);

void predict_all(EstimatorBank& bank, const Vec3& accel_ned, double dt);

/// Corrects one axis; returns the update outcome (state already written back).
UpdateResult update_axis(EstimatorBank& bank, Axis axis, double z);

}  // namespace quadsim::estimator
