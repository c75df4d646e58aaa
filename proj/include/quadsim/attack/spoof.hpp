#pragma once

#include "quadsim/plant/sensors.hpp"

#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

namespace quadsim::attack {

class AttackConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class SpoofTarget { gps_pos, gps_alt, accel, gyro };
enum class SpoofShape { bias, ramp, replay };

std::string_view to_string(SpoofTarget t);
std::string_view to_string(SpoofShape s);
std::optional<SpoofTarget> spoof_target_from_string(std::string_view s);
std::optional<SpoofShape> spoof_shape_from_string(std::string_view s);

/// Additive corruption of one sensor channel over [start, stop). Scalar
/// channels (gps_alt) use the x component of bias and slope.
struct SpoofProfile {
    SpoofTarget target{SpoofTarget::gps_pos};
    SpoofShape shape{SpoofShape::bias};
    Vec3 bias{};
    /// units per second
    Vec3 slope{};
    double delay{0.0};
    double start{0.0};
    double stop{0.0};

    bool active(double t) const { return t >= start && t < stop; }
};

/// Throws AttackConfigError on start >= stop or a non-positive replay delay.
void validate(const SpoofProfile& p);

/// Recent unspoofed frames, for replay.
class SensorHistory {
public:
    explicit SensorHistory(double horizon_s = 0.0) : horizon_(horizon_s) {}

    void push(const plant::SensorFrame& f);
    /// Latest frame with time <= t (and a GPS fix when `need_gps`); nullopt if
    /// the history does not reach back that far.
    std::optional<plant::SensorFrame> at(double t, bool need_gps) const;
    void set_horizon(double h) { horizon_ = h; }
    std::size_t size() const { return frames_.size(); }

private:
    double horizon_;
    std::deque<plant::SensorFrame> frames_;
};

struct SpoofResult {
    plant::SensorFrame frame;
    bool any_active{false};
    /// A replay profile was active but history was too short; the channel
    /// was left untouched.
    bool replay_underrun{false};
};

/// Applies every active profile at time t. Offsets are the attack term a(t)
/// added on top of the already noisy frame.
SpoofResult spoof_sensor(const plant::SensorFrame& frame, const std::vector<SpoofProfile>& profiles, double t,
                         const SensorHistory& history);

/// Attack offset a(t) of one bias or ramp profile (zero when inactive).
Vec3 spoof_offset(const SpoofProfile& p, double t);

}  // namespace quadsim::attack
