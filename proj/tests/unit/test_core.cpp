#include "quadsim/core/params.hpp"
#include "quadsim/core/quaternion.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace quadsim;

namespace {

void expect_quat_near(const Quaternion& a, const Quaternion& b, double tol) {
    EXPECT_NEAR(a.w, b.w, tol);
    EXPECT_NEAR(a.x, b.x, tol);
    EXPECT_NEAR(a.y, b.y, tol);
    EXPECT_NEAR(a.z, b.z, tol);
}

// q and -q are the same rotation
void expect_same_rotation(const Quaternion& a, const Quaternion& b, double tol) {
    const double s = (a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z) < 0.0 ? -1.0 : 1.0;
    expect_quat_near(a, {s * b.w, s * b.x, s * b.y, s * b.z}, tol);
}

Mat3 rot_x(double a) {
    Mat3 m;
    m.m = {1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a)};
    return m;
}
Mat3 rot_y(double a) {
    Mat3 m;
    m.m = {std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a)};
    return m;
}
Mat3 rot_z(double a) {
    Mat3 m;
    m.m = {std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1};
    return m;
}

// Shepperd's method
Quaternion matrix_to_quat(const Mat3& r) {
    const double tr = r(0, 0) + r(1, 1) + r(2, 2);
    Quaternion q;
    if (tr > 0) {
        const double s = std::sqrt(tr + 1.0) * 2;
        q = {0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s, (r(1, 0) - r(0, 1)) / s};
    } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
        const double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2;
        q = {(r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s, (r(0, 2) + r(2, 0)) / s};
    } else if (r(1, 1) > r(2, 2)) {
        const double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2;
        q = {(r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s, (r(1, 2) + r(2, 1)) / s};
    } else {
        const double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2;
        q = {(r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s, 0.25 * s};
    }
    return q;
}

Quaternion random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    return normalized({n(rng), n(rng), n(rng), n(rng)});
}

}  // namespace

TEST(Vec3, Arithmetic) {
    const Vec3 a{1, 2, 3}, b{4, -5, 6};
    EXPECT_EQ(a + b, (Vec3{5, -3, 9}));
    EXPECT_EQ(a - b, (Vec3{-3, 7, -3}));
    EXPECT_EQ(2.0 * a, (Vec3{2, 4, 6}));
    EXPECT_DOUBLE_EQ(dot(a, b), 12.0);
    EXPECT_EQ(cross(Vec3{1, 0, 0}, Vec3{0, 1, 0}), (Vec3{0, 0, 1}));
    EXPECT_DOUBLE_EQ(norm(Vec3{3, 4, 0}), 5.0);
    EXPECT_DOUBLE_EQ(norm_xy(Vec3{3, 4, 12}), 5.0);
    EXPECT_FALSE(is_finite(Vec3{0, NAN, 0}));
    EXPECT_FALSE(is_finite(Vec3{INFINITY, 0, 0}));
}

TEST(WrapPi, HalfOpenInterval) {
    EXPECT_DOUBLE_EQ(wrap_pi(kPi), kPi);
    EXPECT_DOUBLE_EQ(wrap_pi(-kPi), kPi);
    EXPECT_NEAR(wrap_pi(3 * kPi), kPi, 1e-12);
    EXPECT_NEAR(wrap_pi(0.5 + 4 * kPi), 0.5, 1e-12);
    EXPECT_NEAR(wrap_pi(-0.5 - 2 * kPi), -0.5, 1e-12);
}

TEST(QuatFromEuler, Identity) { expect_quat_near(quat_from_euler({0, 0, 0}), {1, 0, 0, 0}, 0.0); }

TEST(QuatFromEuler, HalfTurnYaw) { expect_same_rotation(quat_from_euler({0, 0, kPi}), {0, 0, 0, 1}, 1e-15); }

TEST(QuatFromEuler, MatchesRotationMatrixOracle) {
    const double roll = 0.1, pitch = -0.2, yaw = 0.3;
    const Quaternion oracle = matrix_to_quat(rot_z(yaw) * rot_y(pitch) * rot_x(roll));
    expect_same_rotation(quat_from_euler({roll, pitch, yaw}), oracle, 1e-12);
}

TEST(QuatFromEuler, RotationMatrixAgreesWithRotate) {
    const Quaternion q = quat_from_euler({0.4, -0.7, 2.0});
    const Mat3 r = rotation_matrix(q);
    const Vec3 v{0.3, -1.2, 2.5};
    const Vec3 a = r * v, b = rotate(q, v);
    EXPECT_NEAR(a.x, b.x, 1e-12);
    EXPECT_NEAR(a.y, b.y, 1e-12);
    EXPECT_NEAR(a.z, b.z, 1e-12);
}

TEST(QuatMul, IdentityAndInverse) {
    std::mt19937_64 rng(1);
    const Quaternion q = random_unit(rng);
    expect_quat_near(quat_mul({}, q), q, 1e-15);
    expect_quat_near(quat_mul(q, inverse(q)), {1, 0, 0, 0}, 1e-15);
}

TEST(QuatMul, TwoEighthTurnsMakeQuarterTurn) {
    const Quaternion q45 = quat_from_euler({0, 0, kPi / 4});
    expect_same_rotation(quat_mul(q45, q45), quat_from_euler({0, 0, kPi / 2}), 1e-15);
}

TEST(QuatMul, AssociativeOnUnitQuaternions) {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 1000; ++i) {
        const Quaternion a = random_unit(rng), b = random_unit(rng), c = random_unit(rng);
        expect_quat_near(quat_mul(quat_mul(a, b), c), quat_mul(a, quat_mul(b, c)), 1e-9);
    }
}

TEST(Quaternion, OperationsKeepUnitNorm) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int i = 0; i < 1000; ++i) {
        const Quaternion a = random_unit(rng), b = random_unit(rng);
        EXPECT_NEAR(quat_norm(quat_mul(a, b)), 1.0, 1e-9);
        EXPECT_NEAR(quat_norm(quat_from_euler({u(rng), u(rng), u(rng)})), 1.0, 1e-9);
        EXPECT_NEAR(quat_norm(integrate_body_rates(a, {u(rng), u(rng), u(rng)}, 0.0025)), 1.0, 1e-9);
        EXPECT_NEAR(quat_norm(quat_from_rotation_vector({u(rng), u(rng), u(rng)})), 1.0, 1e-9);
    }
}

TEST(QuatToEuler, RoundTrip) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ang(-kPi + 1e-3, kPi);
    std::uniform_real_distribution<double> pit(-kPi / 2 + 0.01, kPi / 2 - 0.01);
    for (int i = 0; i < 10000; ++i) {
        const EulerAngles in{ang(rng), pit(rng), ang(rng)};
        const EulerAngles out = quat_to_euler(quat_from_euler(in));
        EXPECT_NEAR(out.roll, in.roll, 1e-9);
        EXPECT_NEAR(out.pitch, in.pitch, 1e-9);
        EXPECT_NEAR(out.yaw, in.yaw, 1e-9);
    }
}

TEST(RotationVector, RoundTripAndRange) {
    const Vec3 rv{0.3, -0.2, 1.1};
    const Vec3 back = rotation_vector(quat_from_rotation_vector(rv));
    EXPECT_NEAR(back.x, rv.x, 1e-12);
    EXPECT_NEAR(back.y, rv.y, 1e-12);
    EXPECT_NEAR(back.z, rv.z, 1e-12);
    // a rotation past pi comes back as the short way round
    const Vec3 big = rotation_vector(quat_from_rotation_vector({0, 0, 1.5 * kPi}));
    EXPECT_NEAR(big.z, -0.5 * kPi, 1e-12);
    EXPECT_DOUBLE_EQ(norm(rotation_vector({})), 0.0);
}

TEST(Rotate, BodyToNed) {
    // 90 deg yaw: body forward points east
    const Vec3 v = rotate(quat_from_euler({0, 0, kPi / 2}), {1, 0, 0});
    EXPECT_NEAR(v.x, 0.0, 1e-15);
    EXPECT_NEAR(v.y, 1.0, 1e-15);
    // nose-up pitch tips body forward toward up (negative D)
    const Vec3 w = rotate(quat_from_euler({0, 0.3, 0}), {1, 0, 0});
    EXPECT_LT(w.z, 0.0);
}

TEST(IntegrateBodyRates, ConstantYawRate) {
    Quaternion q;
    for (int i = 0; i < 400; ++i) q = integrate_body_rates(q, {0, 0, 0.5}, 1.0 / 400);
    EXPECT_NEAR(quat_to_euler(q).yaw, 0.5, 1e-12);
}

TEST(TiltAngle, Basics) {
    EXPECT_DOUBLE_EQ(tilt_angle({}), 0.0);
    EXPECT_NEAR(tilt_angle(quat_from_euler({0.2, 0, 1.0})), 0.2, 1e-12);
    EXPECT_NEAR(tilt_angle(quat_from_euler({kPi, 0, 0})), kPi, 1e-12);
}

TEST(ParamSet, LoopRateDefaultIs400) {
    ParamRegistry reg = default_params();
    EXPECT_DOUBLE_EQ(reg.get(param::kLoopRate), 400.0);
    EXPECT_EQ(param_set(reg, param::kLoopRate, 400, ParamSource::gcs), ParamSetStatus::ok);
    EXPECT_DOUBLE_EQ(reg.get(param::kLoopRate), 400.0);
}

TEST(ParamSet, LoopRateOutOfRange) {
    ParamRegistry reg = default_params();
    EXPECT_EQ(param_set(reg, param::kLoopRate, 2000, ParamSource::gcs), ParamSetStatus::out_of_range);
    EXPECT_EQ(param_set(reg, param::kLoopRate, 49, ParamSource::gcs), ParamSetStatus::out_of_range);
    EXPECT_DOUBLE_EQ(reg.get(param::kLoopRate), 400.0);
    EXPECT_TRUE(reg.log().empty());
    EXPECT_EQ(param_set(reg, param::kLoopRate, 1000, ParamSource::gcs), ParamSetStatus::ok);
    EXPECT_EQ(param_set(reg, param::kLoopRate, 50, ParamSource::gcs), ParamSetStatus::ok);
}

TEST(ParamSet, AttackerChangeIsLogged) {
    ParamRegistry reg = default_params();
    ASSERT_EQ(param_set(reg, "ATC_RAT_PIT_I", 0.0, ParamSource::attacker, 3.5), ParamSetStatus::ok);
    ASSERT_EQ(reg.log().size(), 1u);
    const ParamChange& c = reg.log().back();
    EXPECT_EQ(c.name, "ATC_RAT_PIT_I");
    EXPECT_EQ(c.source, ParamSource::attacker);
    EXPECT_DOUBLE_EQ(c.time, 3.5);
    EXPECT_DOUBLE_EQ(c.new_value, 0.0);
    EXPECT_FALSE(c.bound_override);
}

TEST(ParamSet, UnknownNameFailsExplicitly) {
    ParamRegistry reg = default_params();
    EXPECT_EQ(param_set(reg, "NO_SUCH_PARAM", 1.0, ParamSource::gcs), ParamSetStatus::unknown_param);
    EXPECT_THROW(reg.get("NO_SUCH_PARAM"), UnknownParamError);
    EXPECT_FALSE(reg.contains("NO_SUCH_PARAM"));
}

TEST(ParamSet, BoundOverrideOnlyForAttacker) {
    ParamRegistry reg = default_params();
    EXPECT_EQ(param_set(reg, param::kMotOutMax, 1.5, ParamSource::gcs, 0.0, true), ParamSetStatus::out_of_range);
    EXPECT_EQ(param_set(reg, param::kMotOutMax, 1.5, ParamSource::attacker, 0.0, false),
              ParamSetStatus::out_of_range);
    EXPECT_EQ(param_set(reg, param::kMotOutMax, 1.5, ParamSource::attacker, 0.0, true), ParamSetStatus::ok);
    const Param& p = reg.at(param::kMotOutMax);
    EXPECT_DOUBLE_EQ(p.value, 1.5);
    EXPECT_TRUE(p.bounds_widened);
    EXPECT_LE(p.min, p.value);
    EXPECT_GE(p.max, p.value);
    EXPECT_TRUE(reg.log().back().bound_override);
}

TEST(ParamRegistry, DefaultsWithinBounds) {
    const ParamRegistry reg = default_params();
    for (const auto& [name, p] : reg.params()) {
        EXPECT_LE(p.min, p.value) << name;
        EXPECT_LE(p.value, p.max) << name;
    }
}

TEST(ParamRegistry, DeclareRejectsDuplicatesAndBadDefaults) {
    ParamRegistry reg;
    reg.declare("A", 1, 0, 2);
    EXPECT_THROW(reg.declare("A", 1, 0, 2), std::invalid_argument);
    EXPECT_THROW(reg.declare("B", 3, 0, 2), std::invalid_argument);
}

TEST(ParamRegistry, LogReplayReproducesRegistry) {
    std::mt19937_64 rng(11);
    ParamRegistry reg = default_params();
    std::vector<std::string> names;
    for (const auto& [name, p] : reg.params()) names.push_back(name);
    std::uniform_int_distribution<std::size_t> pick(0, names.size() - 1);
    std::uniform_real_distribution<double> frac(-0.2, 1.2);
    int successes = 0;
    for (int i = 0; i < 500; ++i) {
        const Param& p = reg.at(names[pick(rng)]);
        const double v = p.min + frac(rng) * (p.max - p.min);
        const auto src = static_cast<ParamSource>(i % 3);
        if (param_set(reg, p.name, v, src, 0.01 * i, i % 7 == 0) == ParamSetStatus::ok) ++successes;
    }
    EXPECT_EQ(reg.log().size(), static_cast<std::size_t>(successes));
    ParamRegistry replayed = default_params();
    replayed.replay(reg.log());
    EXPECT_TRUE(replayed == reg);
}

TEST(ParamRegistry, VersionCountsSuccessfulSets) {
    ParamRegistry reg = default_params();
    const auto v0 = reg.version();
    param_set(reg, param::kRatRollP, 0.2, ParamSource::gcs);
    param_set(reg, param::kRatRollP, 1e9, ParamSource::gcs);
    EXPECT_EQ(reg.version(), v0 + 1);
}

TEST(ParamSource, StringRoundTrip) {
    for (auto s : {ParamSource::pilot, ParamSource::gcs, ParamSource::attacker}) {
        EXPECT_EQ(param_source_from_string(to_string(s)), s);
    }
    EXPECT_FALSE(param_source_from_string("nobody"));
}
