#pragma once

#include "quadsim/plant/dynamics.hpp"

#include <cstdint>
#include <random>

namespace quadsim::plant {

/// Gaussian noise standard deviations, in sensor units.
struct SensorNoise {
    double accel{0.0};    ///< m/s^2
    double gyro{0.0};     ///< rad/s
    double gps_pos{0.0};  ///< m
    double gps_alt{0.0};  ///< m
};

struct SensorFrame {
    double time{0.0};
    Vec3 accel{};    ///< specific force, body frame
    Vec3 gyro{};     ///< body rates
    Vec3 gps_pos{};  ///< NED
    double gps_alt{0.0};  ///< metres above the D = 0 plane
    bool imu_valid{true};
    bool gps_valid{false};
};

/// Ideal measurement h(x) with no noise.
SensorFrame ideal_measurement(const TrueState& s, double gravity, double time, bool gps_valid);

/// Seeded sensor source. Every call consumes the same number of draws
/// regardless of the noise levels, so two models with the same seed stay in
/// lockstep even when one of them is noise-free.
class SensorModel {
public:
    SensorModel(SensorNoise noise, std::uint64_t seed);

    SensorFrame sense(const TrueState& s, double gravity, double time, bool gps_valid);

    const SensorNoise& noise() const { return noise_; }

private:
    double draw(double sigma);

    SensorNoise noise_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> unit_{0.0, 1.0};
};

/// One-shot sense with a fresh generator seeded from `seed`.
SensorFrame sense(const TrueState& s, const SensorNoise& noise, std::uint64_t seed, double gravity = 9.81,
                  double time = 0.0);

}  // namespace quadsim::plant
