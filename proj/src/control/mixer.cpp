#include "quadsim/control/mixer.hpp"

#include <algorithm>
#include <cmath>

namespace quadsim::control {

std::string_view to_string(FrameGeometry g) {
    return g == FrameGeometry::quad_x ? "quad_x" : "quad_plus";
}

std::optional<FrameGeometry> frame_geometry_from_string(std::string_view s) {
    if (s == "quad_x") return FrameGeometry::quad_x;
    if (s == "quad_plus") return FrameGeometry::quad_plus;
    return std::nullopt;
}

const MixMatrix& mix_matrix(FrameGeometry g) {
    static const MixMatrix kQuadX{{
        {-0.5, 0.5, 0.5},
        {0.5, -0.5, 0.5},
        {0.5, 0.5, -0.5},
        {-0.5, -0.5, -0.5},
    }};
    static const MixMatrix kQuadPlus{{
        {-0.5, 0.0, 0.5},
        {0.5, 0.0, 0.5},
        {0.0, 0.5, -0.5},
        {0.0, -0.5, -0.5},
    }};
    return g == FrameGeometry::quad_x ? kQuadX : kQuadPlus;
}

const MotorLayout& motor_layout(FrameGeometry g) {
    static const double h = std::sqrt(0.5);
    static const MotorLayout kQuadX{
        {h, -h, h, -h},
        {h, -h, -h, h},
        {1.0, 1.0, -1.0, -1.0},
    };
    static const MotorLayout kQuadPlus{
        {0.0, 0.0, 1.0, -1.0},
        {1.0, -1.0, 0.0, 0.0},
        {1.0, 1.0, -1.0, -1.0},
    };
    return g == FrameGeometry::quad_x ? kQuadX : kQuadPlus;
}

bool MotorCommand::any_saturated() const {
    return std::any_of(saturated.begin(), saturated.end(), [](bool b) { return b; });
}

MotorCommand mix(double throttle, const Vec3& torque, FrameGeometry geometry, OutputLimits limits) {
    const MixMatrix& m = mix_matrix(geometry);
    MotorCommand cmd;
    for (std::size_t i = 0; i < kMotorCount; ++i) {
        const double raw = throttle + m[i][0] * torque.x + m[i][1] * torque.y + m[i][2] * torque.z;
        const double c = std::clamp(raw, limits.lo, limits.hi);
        cmd.u[i] = c;
        cmd.saturated[i] = c != raw;
    }
    return cmd;
}

}  // namespace quadsim::control
