#pragma once

#include "quadsim/attack/command_bus.hpp"
#include "quadsim/attack/spoof.hpp"
#include "quadsim/control/pid.hpp"
#include "quadsim/sched/scheduler.hpp"

#include <stdexcept>
#include <string>
#include <variant>

namespace quadsim::attack {

class InvertedLimits : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// (lo + d_min, hi + d_max); throws InvertedLimits if the result has lo >= hi.
control::OutputLimits apply_limit_shift(const control::OutputLimits& limits, double d_min, double d_max);
control::PidGains apply_limit_shift(control::PidGains gains, double d_min, double d_max);

/// tau + tau_adv, applied between the rate PID and the mixer.
Vec3 apply_torque_bias(const Vec3& tau, const Vec3& tau_adv);

/// Registers a stall window; throws AttackConfigError unless duration > 0.
void induce_stall(sched::Scheduler& s, double start, double duration);

struct StallAction {
    double duration{0.0};
};

struct LimitShiftAction {
    double d_min{0.0};
    double d_max{0.0};
};

/// Additive torque amplitude * (frequency > 0 ? sin(2 pi f t) : 1) while
/// active; duration <= 0 means until the end of the run.
struct TorqueBiasAction {
    Vec3 torque{};
    double frequency{0.0};
    double duration{0.0};
};

Vec3 torque_bias_at(const TorqueBiasAction& a, double start, double t);

using AttackAction = std::variant<CommandMessage, SpoofProfile, StallAction, LimitShiftAction, TorqueBiasAction>;

std::string_view action_name(const AttackAction& a);

struct AttackEvent {
    double time{0.0};
    AttackAction action;
};

/// Throws AttackConfigError on a negative trigger time or an invalid payload.
void validate(const AttackEvent& e);

}  // namespace quadsim::attack
