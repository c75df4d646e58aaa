#include "quadsim/estimator/estimator_bank.hpp"

#include <cmath>

namespace quadsim::estimator {

Quaternion attitude_step(const Quaternion& q, const Vec3& gyro, const Vec3& accel_body, double dt, double gain) {
    Quaternion out = integrate_body_rates(q, gyro, dt);
    const double f = norm(accel_body);
    if (gain <= 0.0 || f < 1e-6) {
        return out;
    }
    // measured and predicted direction of gravity, body frame
    const Vec3 g_meas = -accel_body / f;
    const Vec3 g_pred = rotate(inverse(out), Vec3{0.0, 0.0, 1.0});
    const Vec3 c = cross(g_meas, g_pred);
    const double s = norm(c);
    if (s < 1e-15) {
        return out;
    }
    const double angle = std::atan2(s, dot(g_meas, g_pred));
    return quat_mul(out, quat_from_rotation_vector(c * (gain * angle / s)));
}

EstimatorBank make_bank(const Vec3& position, const Vec3& velocity, const Quaternion& attitude, double pos_var,
                        double vel_var) {
    EstimatorBank bank;
    for (int i = 0; i < 3; ++i) {
        AxisFilter& a = bank.axes[static_cast<std::size_t>(i)];
        a.x = {position[i], velocity[i]};
        a.P = {{{pos_var, 0.0}, {0.0, vel_var}}};
    }
    bank.attitude = attitude;
    return bank;
}

Vec3 linear_accel_ned(const Quaternion& attitude, const Vec3& accel_body, double g) {
    return rotate(attitude, accel_body) + Vec3{0.0, 0.0, g};
}

void step_attitude(EstimatorBank& bank, const Vec3& gyro, const Vec3& accel_body, double dt, double gain,
                   const Quaternion& passthrough_reference) {
    if (bank.attitude_passthrough) {
        bank.attitude = passthrough_reference;
        return;
    }
    bank.attitude = attitude_step(bank.attitude, gyro, accel_body, dt, gain);
}

void predict_all(EstimatorBank& bank, const Vec3& accel_ned, double dt) {
    for (int i = 0; i < 3; ++i) {
        auto& a = bank.axes[static_cast<std::size_t>(i)];
        a = predict(a, accel_ned[i], dt);
    }
}

UpdateResult update_axis(EstimatorBank& bank, Axis axis, double z) {
    auto& a = bank.axes[static_cast<std::size_t>(axis)];
    UpdateResult r = update(a, z, bank.gate());
    a = r.filter;
    return r;
}

}  // namespace quadsim::estimator
