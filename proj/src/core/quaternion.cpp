#include "quadsim/core/quaternion.hpp"

#include <algorithm>
#include <cmath>

namespace quadsim {

double wrap_pi(double angle) {
    double a = std::remainder(angle, 2.0 * kPi);
    if (a <= -kPi) {
        a += 2.0 * kPi;
    }
    return a;
}

double quat_norm(const Quaternion& q) {
    return std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
}

Quaternion normalized(const Quaternion& q) {
    const double n = quat_norm(q);
    if (n <= 0.0 || !std::isfinite(n)) {
        return {};
    }
    return {q.w / n, q.x / n, q.y / n, q.z / n};
}

Quaternion conjugate(const Quaternion& q) { return {q.w, -q.x, -q.y, -q.z}; }

Quaternion inverse(const Quaternion& q) { return conjugate(q); }

Quaternion quat_mul(const Quaternion& a, const Quaternion& b) {
    return normalized({a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
                       a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
                       a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
                       a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w});
}

Quaternion quat_from_euler(const EulerAngles& e) {
    const double cr = std::cos(e.roll * 0.5);
    const double sr = std::sin(e.roll * 0.5);
    const double cp = std::cos(e.pitch * 0.5);
    const double sp = std::sin(e.pitch * 0.5);
    const double cy = std::cos(e.yaw * 0.5);
    const double sy = std::sin(e.yaw * 0.5);
    return normalized({cr * cp * cy + sr * sp * sy,
                       sr * cp * cy - cr * sp * sy,
                       cr * sp * cy + sr * cp * sy,
                       cr * cp * sy - sr * sp * cy});
}

EulerAngles quat_to_euler(const Quaternion& q) {
    const double sinp = std::clamp(2.0 * (q.w * q.y - q.z * q.x), -1.0, 1.0);
    return {std::atan2(2.0 * (q.w * q.x + q.y * q.z), 1.0 - 2.0 * (q.x * q.x + q.y * q.y)),
            std::asin(sinp),
            std::atan2(2.0 * (q.w * q.z + q.x * q.y), 1.0 - 2.0 * (q.y * q.y + q.z * q.z))};
}

Quaternion quat_from_rotation_vector(const Vec3& rv) {
    const double angle = norm(rv);
    if (angle < 1e-12) {
        // second-order small-angle form keeps the map smooth through zero
        return normalized({1.0 - angle * angle / 8.0, rv.x * 0.5, rv.y * 0.5, rv.z * 0.5});
    }
    const double s = std::sin(angle * 0.5) / angle;
    return normalized({std::cos(angle * 0.5), rv.x * s, rv.y * s, rv.z * s});
}

Vec3 rotation_vector(const Quaternion& qin) {
    Quaternion q = normalized(qin);
    if (q.w < 0.0) {
        q = {-q.w, -q.x, -q.y, -q.z};
    }
    const double s = std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z);
    if (s < 1e-12) {
        return {2.0 * q.x, 2.0 * q.y, 2.0 * q.z};
    }
    const double angle = 2.0 * std::atan2(s, q.w);
    return Vec3{q.x, q.y, q.z} * (angle / s);
}

Mat3 rotation_matrix(const Quaternion& q) {
    const double ww = q.w * q.w;
    const double xx = q.x * q.x;
    const double yy = q.y * q.y;
    const double zz = q.z * q.z;
    Mat3 r{};
    r(0, 0) = ww + xx - yy - zz;
    r(0, 1) = 2.0 * (q.x * q.y - q.w * q.z);
    r(0, 2) = 2.0 * (q.x * q.z + q.w * q.y);
    r(1, 0) = 2.0 * (q.x * q.y + q.w * q.z);
    r(1, 1) = ww - xx + yy - zz;
    r(1, 2) = 2.0 * (q.y * q.z - q.w * q.x);
    r(2, 0) = 2.0 * (q.x * q.z - q.w * q.y);
    r(2, 1) = 2.0 * (q.y * q.z + q.w * q.x);
    r(2, 2) = ww - xx - yy + zz;
    return r;
}

Vec3 rotate(const Quaternion& q, const Vec3& v) { return rotation_matrix(q) * v; }

Quaternion integrate_body_rates(const Quaternion& q, const Vec3& w, double dt) {
    return quat_mul(q, quat_from_rotation_vector(w * dt));
}

double tilt_angle(const Quaternion& q) {
    const double c = 1.0 - 2.0 * (q.x * q.x + q.y * q.y);
    return std::acos(std::clamp(c, -1.0, 1.0));
}

bool is_finite(const Quaternion& q) {
    return std::isfinite(q.w) && std::isfinite(q.x) && std::isfinite(q.y) && std::isfinite(q.z);
}

}  // namespace quadsim
