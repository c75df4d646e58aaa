#pragma once

#include <array>
#include <optional>

namespace quadsim::estimator {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

/// Two-state (position, velocity) Kalman filter for one NED axis, driven by
/// acceleration and corrected by position measurements.
struct AxisFilter {
    Vec2 x{0.0, 0.0};
    Mat2 P{{{1.0, 0.0}, {0.0, 1.0}}};
    Mat2 Q{{{0.0, 0.0}, {0.0, 0.0}}};
    double R{1.0};
    Vec2 H{1.0, 0.0};

    /// Gain and innovation of the most recent update (accepted or gated).
    Vec2 K{0.0, 0.0};
    double innovation{0.0};
    /// Innovation variance H P H^T + R at the last update.
    double innovation_variance{0.0};
    bool has_gain{false};
    bool predicted{false};
};

/// Discrete white-acceleration process noise for sample period dt.
Mat2 process_noise(double accel_sigma, double dt);

/// x <- F x + [dt^2/2, dt] u;  P <- F P F^T + Q with F = [[1, dt], [0, 1]].
AxisFilter predict(AxisFilter f, double accel, double dt);

enum class UpdateStatus { accepted, gate_rejected };

struct UpdateResult {
    AxisFilter filter;
    UpdateStatus status{UpdateStatus::accepted};
    /// Normalized innovation y^2 / (H P H^T + R).
    double gate_ratio{0.0};
};

/// Measurement correction with an optional innovation gate. A rejected
/// measurement leaves state and covariance untouched but records the gain and
/// innovation it would have produced.
UpdateResult update(AxisFilter f, double z, std::optional<double> gate_threshold = std::nullopt);

/// Single-step estimate corruption K * a for an additive measurement attack
/// a; nullopt until the filter has computed a gain.
std::optional<Vec2> injected_bias(const AxisFilter& f, double attack_offset);

}  // namespace quadsim::estimator
