#include "quadsim/plant/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace quadsim::plant {

void validate(const PlantParams& p) {
    const bool positive = p.mass > 0 && p.inertia.x > 0 && p.inertia.y > 0 && p.inertia.z > 0 && p.arm_length > 0 &&
                          p.motor_thrust > 0 && p.yaw_coeff > 0 && p.drag >= 0 && p.gravity > 0;
    if (!positive) {
        throw std::invalid_argument("plant parameters must be positive");
    }
    if (p.max_total_thrust() <= p.mass * p.gravity) {
        throw std::invalid_argument("plant cannot hover: max thrust <= m g");
    }
}

bool is_finite(const TrueState& s) {
    return is_finite(s.position) && is_finite(s.velocity) && is_finite(s.acceleration) && is_finite(s.attitude) &&
           is_finite(s.rates);
}

Wrench motor_wrench(const std::array<double, control::kMotorCount>& u, const PlantParams& p) {
    const auto& layout = control::motor_layout(p.geometry);
    Wrench w;
    for (std::size_t i = 0; i < control::kMotorCount; ++i) {
        const double f = u[i] * p.motor_thrust;
        const double x = layout.x_unit[i] * p.arm_length;
        const double y = layout.y_unit[i] * p.arm_length;
        w.thrust += f;
        // r x (0, 0, -f)
        w.torque.x += -y * f;
        w.torque.y += x * f;
        w.torque.z += layout.yaw_sign[i] * p.yaw_coeff * u[i];
    }
    return w;
}

StepResult step_dynamics(const TrueState& s, const control::MotorCommand& cmd, const PlantParams& p, double dt) {
    if (!(dt > 0.0 && dt <= 0.01)) {
        throw std::invalid_argument("plant step dt must be in (0, 0.01]");
    }
    StepResult r;
    TrueState& n = r.state;
    n = s;

    for (std::size_t i = 0; i < control::kMotorCount; ++i) {
        const double c = std::clamp(cmd.u[i], 0.0, 1.0);
        r.clamped = r.clamped || c != cmd.u[i];
        n.motors[i] = c;
    }
    const Wrench w = motor_wrench(n.motors, p);

    const Vec3& I = p.inertia;
    const Vec3 Iw = hadamard(I, s.rates);
    const Vec3 net = w.torque - cross(s.rates, Iw);
    const Vec3 wdot{net.x / I.x, net.y / I.y, net.z / I.z};

    const Vec3 thrust_ned = rotate(s.attitude, Vec3{0.0, 0.0, -w.thrust});
    Vec3 accel = thrust_ned / p.mass + Vec3{0.0, 0.0, p.gravity} - s.velocity * (p.drag / p.mass);

    n.rates = s.rates + wdot * dt;
    n.attitude = integrate_body_rates(s.attitude, n.rates, dt);
    n.velocity = s.velocity + accel * dt;
    n.position = s.position + n.velocity * dt;
    n.on_ground = false;

    if (p.ground_contact && n.position.z >= 0.0) {
        n.position.z = 0.0;
        if (n.velocity.z > 0.0) {
            n.velocity = {0.0, 0.0, 0.0};
            n.rates = {0.0, 0.0, 0.0};
        }
        accel = (n.velocity - s.velocity) / dt;
        n.on_ground = true;
    }
    n.acceleration = accel;

    if (!is_finite(n)) {
        r.status = StepStatus::non_finite;
    }
    return r;
}

StepResult advance(const TrueState& s, const control::MotorCommand& u, const PlantParams& p, double dt,
                   double max_substep) {
    const int n = std::max(1, static_cast<int>(std::ceil(dt / max_substep - 1e-9)));
    const double h = dt / n;
    StepResult r{s, StepStatus::ok, false};
    for (int i = 0; i < n; ++i) {
        const bool clamped = r.clamped;
        r = step_dynamics(r.state, u, p, h);
        r.clamped = r.clamped || clamped;
        if (r.status != StepStatus::ok) {
            break;
        }
    }
    return r;
}

}  // namespace quadsim::plant
