#include "quadsim/control/pid.hpp"

#include <algorithm>
#include <cmath>

namespace quadsim::control {

PidOutput pid_step(const PidGains& g, PidState s, double error, double target, double dt, bool freeze_integrator) {
    PidOutput out;

    if (g.ki == 0.0) {
        s.integral = 0.0;
    } else {
        double next = s.integral + error * dt;
        if (g.imax < kInf) {
            const double bound = g.imax / std::abs(g.ki);
            next = std::clamp(next, -bound, bound);
        }
        if (!freeze_integrator || std::abs(next) < std::abs(s.integral)) {
            s.integral = next;
        }
    }

    out.p = g.kp * error;
    out.i = g.ki * s.integral;
    out.d = s.prev_valid ? g.kd * (error - s.prev_error) / dt : 0.0;
    out.ff = g.kff * target;

    s.prev_error = error;
    s.prev_valid = true;

    const double raw = out.p + out.i + out.d + out.ff;
    out.output = std::clamp(raw, g.limits.lo, g.limits.hi);
    out.saturated = out.output != raw;
    out.state = s;
    return out;
}

}  // namespace quadsim::control
