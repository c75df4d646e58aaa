#include "quadsim/estimator/axis_filter.hpp"

namespace quadsim::estimator {

namespace {

void symmetrize(Mat2& p) {
    const double off = 0.5 * (p[0][1] + p[1][0]);
    p[0][1] = off;
    p[1][0] = off;
}

}  // namespace

Mat2 process_noise(double accel_sigma, double dt) {
    const double s2 = accel_sigma * accel_sigma;
    const double dt2 = dt * dt;
    return {{{s2 * dt2 * dt2 / 4.0, s2 * dt2 * dt / 2.0}, {s2 * dt2 * dt / 2.0, s2 * dt2}}};
}

AxisFilter predict(AxisFilter f, double accel, double dt) {
    const auto [p, v] = f.x;
    f.x = {p + v * dt + 0.5 * dt * dt * accel, v + dt * accel};

    // F P F^T expanded for F = [[1, dt], [0, 1]]
    const Mat2& P = f.P;
    const double p00 = P[0][0] + dt * (P[1][0] + P[0][1]) + dt * dt * P[1][1];
    const double p01 = P[0][1] + dt * P[1][1];
    const double p10 = P[1][0] + dt * P[1][1];
    const double p11 = P[1][1];
    f.P = {{{p00 + f.Q[0][0], p01 + f.Q[0][1]}, {p10 + f.Q[1][0], p11 + f.Q[1][1]}}};
    symmetrize(f.P);
    f.predicted = true;
    return f;
}

UpdateResult update(AxisFilter f, double z, std::optional<double> gate_threshold) {
    const Mat2& P = f.P;
    const Vec2& H = f.H;
    // P H^T
    const Vec2 pht{P[0][0] * H[0] + P[0][1] * H[1], P[1][0] * H[0] + P[1][1] * H[1]};
    const double s = H[0] * pht[0] + H[1] * pht[1] + f.R;
    const double y = z - (H[0] * f.x[0] + H[1] * f.x[1]);
    const Vec2 k{pht[0] / s, pht[1] / s};

    f.K = k;
    f.innovation = y;
    f.innovation_variance = s;
    f.has_gain = true;
    f.predicted = false;

    const double ratio = y * y / s;
    if (gate_threshold && ratio > *gate_threshold) {
        return {f, UpdateStatus::gate_rejected, ratio};
    }

    f.x = {f.x[0] + k[0] * y, f.x[1] + k[1] * y};

    // (I - K H) P
    const double a00 = 1.0 - k[0] * H[0];
    const double a01 = -k[0] * H[1];
    const double a10 = -k[1] * H[0];
    const double a11 = 1.0 - k[1] * H[1];
    f.P = {{{a00 * P[0][0] + a01 * P[1][0], a00 * P[0][1] + a01 * P[1][1]},
            {a10 * P[0][0] + a11 * P[1][0], a10 * P[0][1] + a11 * P[1][1]}}};
    symmetrize(f.P);
    return {f, UpdateStatus::accepted, ratio};
}

std::optional<Vec2> injected_bias(const AxisFilter& f, double attack_offset) {
    if (!f.has_gain) {
        return std::nullopt;
    }
    return Vec2{f.K[0] * attack_offset, f.K[1] * attack_offset};
}

}  // namespace quadsim::estimator
