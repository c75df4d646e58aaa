#include "quadsim/core/params.hpp"

#include <algorithm>
#include <cmath>

namespace quadsim {

std::string_view to_string(ParamSource s) {
    switch (s) {
        case ParamSource::pilot:
            return "pilot";
        case ParamSource::gcs:
            return "gcs";
        case ParamSource::attacker:
            return "attacker";
    }
    return "gcs";
}

std::optional<ParamSource> param_source_from_string(std::string_view s) {
    if (s == "pilot") return ParamSource::pilot;
    if (s == "gcs") return ParamSource::gcs;
    if (s == "attacker") return ParamSource::attacker;
    return std::nullopt;
}

std::string_view to_string(ParamSetStatus s) {
    switch (s) {
        case ParamSetStatus::ok:
            return "ok";
        case ParamSetStatus::unknown_param:
            return "unknown_param";
        case ParamSetStatus::out_of_range:
            return "out_of_range";
    }
    return "ok";
}

void ParamRegistry::declare(std::string name, double value, double min, double max, bool mutable_in_flight) {
    if (params_.contains(name)) {
        throw std::invalid_argument("duplicate parameter: " + name);
    }
    if (!(min <= value && value <= max)) {
        throw std::invalid_argument("default outside bounds for parameter: " + name);
    }
    Param p{name, value, min, max, mutable_in_flight, false};
    params_.emplace(std::move(name), std::move(p));
}

ParamSetStatus ParamRegistry::set(std::string_view name, double value, ParamSource source, double time,
                                  bool bound_override) {
    auto it = params_.find(name);
    if (it == params_.end()) {
        return ParamSetStatus::unknown_param;
    }
    Param& p = it->second;
    if (!std::isfinite(value)) {
        return ParamSetStatus::out_of_range;
    }
    const bool in_range = p.min <= value && value <= p.max;
    const bool override_active = bound_override && source == ParamSource::attacker;
    if (!in_range && !override_active) {
        return ParamSetStatus::out_of_range;
    }
    if (!in_range) {
        p.min = std::min(p.min, value);
        p.max = std::max(p.max, value);
        p.bounds_widened = true;
    }
    log_.push_back({time, p.name, p.value, value, source, !in_range});
    p.value = value;
    ++version_;
    return ParamSetStatus::ok;
}

double ParamRegistry::get(std::string_view name) const { return at(name).value; }

const Param& ParamRegistry::at(std::string_view name) const {
    auto it = params_.find(name);
    if (it == params_.end()) {
        throw UnknownParamError(std::string(name));
    }
    return it->second;
}

bool ParamRegistry::contains(std::string_view name) const { return params_.find(name) != params_.end(); }

void ParamRegistry::replay(const std::vector<ParamChange>& changes) {
    for (const auto& c : changes) {
        set(c.name, c.new_value, c.source, c.time, c.bound_override);
    }
}

bool operator==(const Param& a, const Param& b) {
    return a.name == b.name && a.value == b.value && a.min == b.min && a.max == b.max &&
           a.mutable_in_flight == b.mutable_in_flight && a.bounds_widened == b.bounds_widened;
}

bool operator==(const ParamRegistry& a, const ParamRegistry& b) { return a.params_ == b.params_; }

ParamSetStatus param_set(ParamRegistry& reg, std::string_view name, double value, ParamSource source, double time,
                         bool bound_override) {
    return reg.set(name, value, source, time, bound_override);
}

ParamRegistry default_params() {
    using namespace param;
    ParamRegistry r;
    auto d = [&r](std::string_view n, double v, double lo, double hi, bool in_flight = true) {
        r.declare(std::string(n), v, lo, hi, in_flight);
    };

    d(kLoopRate, 400.0, 50.0, 1000.0, false);

    d(kRatRollP, 0.135, 0.0, 5.0);
    d(kRatRollI, 0.135, 0.0, 5.0);
    d(kRatRollD, 0.0036, 0.0, 0.5);
    d(kRatRollFF, 0.0, 0.0, 1.0);
    d(kRatRollImax, 0.5, 0.0, 1.0);
    d(kRatPitchP, 0.135, 0.0, 5.0);
    d(kRatPitchI, 0.135, 0.0, 5.0);
    d(kRatPitchD, 0.0036, 0.0, 0.5);
    d(kRatPitchFF, 0.0, 0.0, 1.0);
    d(kRatPitchImax, 0.5, 0.0, 1.0);
    // Yaw authority of the default airframe is ~2.5 rad/s^2 per unit torque,
    // far below roll/pitch, so the yaw rate loop carries its own gains.
    d(kRatYawP, 2.0, 0.0, 20.0);
    d(kRatYawI, 0.2, 0.0, 20.0);
    d(kRatYawD, 0.0, 0.0, 0.5);
    d(kRatYawFF, 0.0, 0.0, 1.0);
    d(kRatYawImax, 0.5, 0.0, 1.0);

    d(kAngRollP, 4.5, 0.0, 20.0);
    d(kAngPitchP, 4.5, 0.0, 20.0);
    d(kAngYawP, 1.0, 0.0, 20.0);
    d(kSqrtOmegaMax, 0.501, 1e-3, 20.0);
    d(kSqrtEpsilon, 1e-3, 1e-6, 1.0);
    d(kSqrtThreshold, 0.5, 1e-3, 3.2);
    d(kRateRPMax, 3.5, 0.1, 20.0);
    d(kRateYMax, 1.5, 0.1, 20.0);
    d(kSlewYaw, 1.047, 0.01, 20.0);
    d(kAccelShapeMax, 19.2, 0.1, 200.0);
    d(kAngleMax, 0.5236, 0.1, 1.1);

    d(kPosXYP, 1.0, 0.0, 10.0);
    d(kPosXYI, 0.0, 0.0, 10.0);
    d(kPosXYD, 0.0, 0.0, 10.0);
    d(kPosXYImax, 1.0, 0.0, 20.0);
    d(kPosXYVelMax, 5.0, 0.1, 30.0);
    d(kVelXYP, 2.0, 0.0, 20.0);
    d(kVelXYI, 1.0, 0.0, 20.0);
    d(kVelXYD, 0.0, 0.0, 5.0);
    d(kVelXYFF, 0.0, 0.0, 5.0);
    d(kVelXYImax, 5.0, 0.0, 20.0);
    d(kAccXYMax, 5.0, 0.1, 20.0);

    d(kPosZP, 1.0, 0.0, 10.0);
    d(kPosZI, 0.0, 0.0, 10.0);
    d(kPosZD, 0.0, 0.0, 10.0);
    d(kPosZImax, 1.0, 0.0, 20.0);
    d(kPosZVelMax, 2.5, 0.1, 20.0);
    d(kVelZP, 3.0, 0.0, 20.0);
    d(kVelZI, 1.0, 0.0, 20.0);
    d(kVelZD, 0.0, 0.0, 5.0);
    d(kVelZImax, 5.0, 0.0, 20.0);
    d(kVelZAccMax, 5.0, 0.1, 20.0);
    d(kAccZP, 0.05, 0.0, 2.0);
    d(kAccZI, 0.1, 0.0, 2.0);
    d(kAccZD, 0.0, 0.0, 1.0);
    d(kAccZImax, 0.8, 0.0, 1.0);
    d(kAccZFilter, 20.0, 0.0, 200.0);

    d(kThrustHover, 0.5, 0.05, 0.95);
    d(kMotOutMin, 0.0, 0.0, 1.0);
    d(kMotOutMax, 1.0, 0.0, 1.0);
    d(kMotSpinMin, 0.15, 0.0, 0.5);

    d(kEkfGate, 25.0, 0.1, 1e6);
    d(kEkfGateEnable, 1.0, 0.0, 1.0);
    d(kEkfAccNoise, 0.5, 1e-4, 10.0);
    d(kEkfPosNoise, 0.5, 1e-3, 100.0);
    d(kEkfAltNoise, 0.5, 1e-3, 100.0);
    d(kAhrsCompGain, 0.02, 0.0, 1.0);

    d(kCrashCheckEnable, 1.0, 0.0, 1.0);
    d(kWatchdogEnable, 1.0, 0.0, 1.0);
    d(kGcsFailsafeEnable, 1.0, 0.0, 1.0);
    d(kGcsTimeout, 3.0, 0.5, 60.0);

    d(kPilotVelXYMax, 5.0, 0.1, 30.0);
    d(kPilotVelZMax, 2.5, 0.1, 10.0);
    return r;
}

}  // namespace quadsim
