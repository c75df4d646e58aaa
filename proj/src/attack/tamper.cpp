#include "quadsim/attack/tamper.hpp"

#include <cmath>

namespace quadsim::attack {

control::OutputLimits apply_limit_shift(const control::OutputLimits& limits, double d_min, double d_max) {
    const control::OutputLimits out{limits.lo + d_min, limits.hi + d_max};
    if (!(out.lo < out.hi)) {
        throw InvertedLimits("limit shift leaves min >= max");
    }
    return out;
}

control::PidGains apply_limit_shift(control::PidGains gains, double d_min, double d_max) {
    gains.limits = apply_limit_shift(gains.limits, d_min, d_max);
    return gains;
}

Vec3 apply_torque_bias(const Vec3& tau, const Vec3& tau_adv) { return tau + tau_adv; }

void induce_stall(sched::Scheduler& s, double start, double duration) {
    if (!(duration > 0.0)) {
        throw AttackConfigError("stall duration must be positive");
    }
    s.add_stall({start, duration});
}

Vec3 torque_bias_at(const TorqueBiasAction& a, double start, double t) {
    if (t < start || (a.duration > 0.0 && t >= start + a.duration)) {
        return {};
    }
    if (a.frequency > 0.0) {
        return a.torque * std::sin(2.0 * kPi * a.frequency * t);
    }
    return a.torque;
}

std::string_view action_name(const AttackAction& a) {
    struct Visitor {
        std::string_view operator()(const CommandMessage&) const { return "command"; }
        std::string_view operator()(const SpoofProfile&) const { return "spoof"; }
        std::string_view operator()(const StallAction&) const { return "stall"; }
        std::string_view operator()(const LimitShiftAction&) const { return "limit_shift"; }
        std::string_view operator()(const TorqueBiasAction&) const { return "torque_bias"; }
    };
    return std::visit(Visitor{}, a);
}

void validate(const AttackEvent& e) {
    if (!(e.time >= 0.0)) {
        throw AttackConfigError("attack trigger time must be >= 0");
    }
    if (const auto* p = std::get_if<SpoofProfile>(&e.action)) {
        validate(*p);
    } else if (const auto* s = std::get_if<StallAction>(&e.action)) {
        if (!(s->duration > 0.0)) throw AttackConfigError("stall duration must be positive");
    } else if (const auto* tb = std::get_if<TorqueBiasAction>(&e.action)) {
        if (!is_finite(tb->torque) || tb->frequency < 0.0) throw AttackConfigError("invalid torque bias");
    } else if (const auto* ls = std::get_if<LimitShiftAction>(&e.action)) {
        if (!std::isfinite(ls->d_min) || !std::isfinite(ls->d_max)) throw AttackConfigError("invalid limit shift");
    }
}

}  // namespace quadsim::attack
