#pragma once

#include "quadsim/core/vec3.hpp"

#include <numbers>

namespace quadsim {

inline constexpr double kPi = std::numbers::pi;

/// Hamilton quaternion, scalar first. Attitude quaternions rotate body-frame
/// vectors into NED.
struct Quaternion {
    double w{1.0};
    double x{0.0};
    double y{0.0};
    double z{0.0};

    friend constexpr bool operator==(const Quaternion&, const Quaternion&) = default;
};

/// Roll, pitch, yaw in radians (Z-Y-X intrinsic order).
struct EulerAngles {
    double roll{0.0};
    double pitch{0.0};
    double yaw{0.0};
};

/// Wraps an angle to (-pi, pi].
double wrap_pi(double angle);

double quat_norm(const Quaternion& q);
Quaternion normalized(const Quaternion& q);
Quaternion conjugate(const Quaternion& q);
/// Inverse of a unit quaternion (the conjugate).
Quaternion inverse(const Quaternion& q);

/// Hamilton product a * b, renormalized.
Quaternion quat_mul(const Quaternion& a, const Quaternion& b);

Quaternion quat_from_euler(const EulerAngles& angles);
EulerAngles quat_to_euler(const Quaternion& q);

/// Quaternion for a rotation of |rv| radians about rv / |rv|.
Quaternion quat_from_rotation_vector(const Vec3& rv);

/// Rotation vector (axis times angle) with angle in [0, pi].
Vec3 rotation_vector(const Quaternion& q);

/// Rotates v by q (q * v * q^-1); for attitude quaternions this maps body to NED.
Vec3 rotate(const Quaternion& q, const Vec3& v);

/// Body to NED rotation matrix.
Mat3 rotation_matrix(const Quaternion& q);

/// Propagates q by body rates w over dt (q <- q * exp(w dt / 2)).
Quaternion integrate_body_rates(const Quaternion& q, const Vec3& w, double dt);

/// Tilt of the body z axis away from NED down, in [0, pi].
double tilt_angle(const Quaternion& q);

bool is_finite(const Quaternion& q);

}  // namespace quadsim
