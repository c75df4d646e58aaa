#pragma once

#include "quadsim/control/pid.hpp"
#include "quadsim/core/vec3.hpp"

#include <array>
#include <optional>
#include <string_view>

namespace quadsim::control {

inline constexpr int kMotorCount = 4;

enum class FrameGeometry { quad_x, quad_plus };

std::string_view to_string(FrameGeometry g);
std::optional<FrameGeometry> frame_geometry_from_string(std::string_view s);

/// Rows are motors, columns are (roll, pitch, yaw) torque factors.
using MixMatrix = std::array<std::array<double, 3>, kMotorCount>;

/// Per-motor layout in the body frame (x forward, y right), plus spin
/// direction: +1 for motors whose reaction torque yaws the body clockwise
/// seen from above (positive NED yaw).
struct MotorLayout {
    std::array<double, kMotorCount> x_unit{};
    std::array<double, kMotorCount> y_unit{};
    std::array<double, kMotorCount> yaw_sign{};
};

/// Quad-X: motors 1..4 front-right, back-left, front-left, back-right.
/// Quad-+: motors 1..4 right, left, front, back.
const MixMatrix& mix_matrix(FrameGeometry g);
const MotorLayout& motor_layout(FrameGeometry g);

struct MotorCommand {
    std::array<double, kMotorCount> u{};
    std::array<bool, kMotorCount> saturated{};

    bool any_saturated() const;
};

/// u_m = T_out + M tau, each clamped to [lo, hi].
MotorCommand mix(double throttle, const Vec3& torque, FrameGeometry geometry, OutputLimits limits = {0.0, 1.0});

}  // namespace quadsim::control
