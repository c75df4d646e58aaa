#pragma once

#include <limits>

namespace quadsim::control {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct OutputLimits {
    double lo{-kInf};
    double hi{kInf};

    friend constexpr bool operator==(const OutputLimits&, const OutputLimits&) = default;
};

struct PidGains {
    double kp{0.0};
    double ki{0.0};
    double kd{0.0};
    double kff{0.0};
    /// Absolute clamp on the I-term contribution ki * integral.
    double imax{kInf};
    OutputLimits limits{};
};

struct PidState {
    double integral{0.0};
    double prev_error{0.0};
    bool prev_valid{false};
};

struct PidOutput {
    double output{0.0};
    PidState state{};
    double p{0.0};
    double i{0.0};
    double d{0.0};
    double ff{0.0};
    bool saturated{false};
};

/// Discrete PID with feed-forward:
///   out = kp e + ki sum(e dt) + kd (e - e_prev) / dt + kff target
/// The running sum includes the current sample. The derivative is zero on
/// the first call after a reset. With `freeze_integrator` set the sum may
/// only shrink in magnitude (anti-windup while the actuator is saturated).
PidOutput pid_step(const PidGains& g, PidState s, double error, double target, double dt,
                   bool freeze_integrator = false);

}  // namespace quadsim::control
