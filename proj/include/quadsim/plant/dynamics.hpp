#pragma once

#include "quadsim/control/mixer.hpp"
#include "quadsim/core/quaternion.hpp"

#include <array>

namespace quadsim::plant {

struct PlantParams {
    double mass{1.5};
    Vec3 inertia{0.02, 0.02, 0.04};
    double arm_length{0.25};
    /// Thrust of one motor at u = 1 (N); thrust is linear in u.
    double motor_thrust{7.5};
    /// Reaction torque of one motor per unit command (N m).
    double yaw_coeff{0.05};
    /// Linear drag (N s / m).
    double drag{0.1};
    double gravity{9.81};
    control::FrameGeometry geometry{control::FrameGeometry::quad_x};
    /// Ground plane at D = 0; off by default so the closed-form oracles hold.
    bool ground_contact{false};

    double max_total_thrust() const { return motor_thrust * control::kMotorCount; }
    /// Per-motor command that balances gravity with a level attitude.
    double hover_throttle() const { return mass * gravity / max_total_thrust(); }
};

/// Throws std::invalid_argument if any parameter is non-positive or hover is
/// infeasible.
void validate(const PlantParams& p);

struct TrueState {
    Vec3 position{};
    Vec3 velocity{};
    /// Linear acceleration over the last step (NED).
    Vec3 acceleration{};
    Quaternion attitude{};
    /// Body rates (FRD).
    Vec3 rates{};
    /// Motor commands as applied, after the physical [0, 1] clamp.
    std::array<double, control::kMotorCount> motors{};
    bool on_ground{false};
};

bool is_finite(const TrueState& s);

struct Wrench {
    double thrust{0.0};  ///< total, along body -z (N)
    Vec3 torque{};       ///< body frame (N m)
};

/// Thrust and body torques produced by clamped motor commands.
Wrench motor_wrench(const std::array<double, control::kMotorCount>& u, const PlantParams& p);

enum class StepStatus { ok, non_finite };

struct StepResult {
    TrueState state{};
    StepStatus status{StepStatus::ok};
    /// Set when any command was outside [0, 1] and had to be clamped.
    bool clamped{false};
};

/// One semi-implicit Euler step. dt must lie in (0, 0.01]; throws
/// std::invalid_argument otherwise.
StepResult step_dynamics(const TrueState& s, const control::MotorCommand& u, const PlantParams& p, double dt);

/// Advances by dt in equal substeps no longer than max_substep.
StepResult advance(const TrueState& s, const control::MotorCommand& u, const PlantParams& p, double dt,
                   double max_substep = 0.0025);

}  // namespace quadsim::plant
