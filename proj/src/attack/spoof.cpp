#include "quadsim/attack/spoof.hpp"

namespace quadsim::attack {

std::string_view to_string(SpoofTarget t) {
    switch (t) {
        case SpoofTarget::gps_pos: return "gps_pos";
        case SpoofTarget::gps_alt: return "gps_alt";
        case SpoofTarget::accel: return "accel";
        case SpoofTarget::gyro: return "gyro";
    }
    return "?";
}

std::string_view to_string(SpoofShape s) {
    switch (s) {
        case SpoofShape::bias: return "bias";
        case SpoofShape::ramp: return "ramp";
        case SpoofShape::replay: return "replay";
    }
    return "?";
}

std::optional<SpoofTarget> spoof_target_from_string(std::string_view s) {
    for (auto t : {SpoofTarget::gps_pos, SpoofTarget::gps_alt, SpoofTarget::accel, SpoofTarget::gyro}) {
        if (to_string(t) == s) return t;
    }
    return std::nullopt;
}

std::optional<SpoofShape> spoof_shape_from_string(std::string_view s) {
    for (auto x : {SpoofShape::bias, SpoofShape::ramp, SpoofShape::replay}) {
        if (to_string(x) == s) return x;
    }
    return std::nullopt;
}

void validate(const SpoofProfile& p) {
    if (!(p.start < p.stop)) {
        throw AttackConfigError("spoof profile needs start < stop");
    }
    if (p.shape == SpoofShape::replay && !(p.delay > 0.0)) {
        throw AttackConfigError("replay spoof needs delay > 0");
    }
    if (!is_finite(p.bias) || !is_finite(p.slope)) {
        throw AttackConfigError("spoof profile offsets must be finite");
    }
}

void SensorHistory::push(const plant::SensorFrame& f) {
    frames_.push_back(f);
    while (!frames_.empty() && frames_.front().time < f.time - horizon_) {
        frames_.pop_front();
    }
}

std::optional<plant::SensorFrame> SensorHistory::at(double t, bool need_gps) const {
    for (auto it = frames_.rbegin(); it != frames_.rend(); ++it) {
        if (it->time <= t + 1e-9 && (!need_gps || it->gps_valid)) {
            return *it;
        }
    }
    return std::nullopt;
}

Vec3 spoof_offset(const SpoofProfile& p, double t) {
    if (!p.active(t)) return {};
    switch (p.shape) {
        case SpoofShape::bias: return p.bias;
        case SpoofShape::ramp: return p.slope * (t - p.start);
        case SpoofShape::replay: return {};
    }
    return {};
}

namespace {

bool channel_present(const plant::SensorFrame& f, SpoofTarget target) {
    return target == SpoofTarget::accel || target == SpoofTarget::gyro ? f.imu_valid : f.gps_valid;
}

void add_offset(plant::SensorFrame& f, SpoofTarget target, const Vec3& a) {
    switch (target) {
        case SpoofTarget::gps_pos: f.gps_pos += a; break;
        case SpoofTarget::gps_alt: f.gps_alt += a.x; break;
        case SpoofTarget::accel: f.accel += a; break;
        case SpoofTarget::gyro: f.gyro += a; break;
    }
}

void copy_channel(plant::SensorFrame& f, const plant::SensorFrame& from, SpoofTarget target) {
    switch (target) {
        case SpoofTarget::gps_pos: f.gps_pos = from.gps_pos; break;
        case SpoofTarget::gps_alt: f.gps_alt = from.gps_alt; break;
        case SpoofTarget::accel: f.accel = from.accel; break;
        case SpoofTarget::gyro: f.gyro = from.gyro; break;
    }
}

}  // namespace

SpoofResult spoof_sensor(const plant::SensorFrame& frame, const std::vector<SpoofProfile>& profiles, double t,
                         const SensorHistory& history) {
    SpoofResult r{frame, false, false};
    for (const SpoofProfile& p : profiles) {
        if (!p.active(t)) continue;
        r.any_active = true;
        if (!channel_present(frame, p.target)) continue;
        if (p.shape == SpoofShape::replay) {
            const bool gps = p.target == SpoofTarget::gps_pos || p.target == SpoofTarget::gps_alt;
            auto old = history.at(t - p.delay, gps);
            if (!old) {
                r.replay_underrun = true;
                continue;
            }
            copy_channel(r.frame, *old, p.target);
        } else {
            add_offset(r.frame, p.target, spoof_offset(p, t));
        }
    }
    return r;
}

}  // namespace quadsim::attack
