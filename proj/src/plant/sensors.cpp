#include "quadsim/plant/sensors.hpp"

namespace quadsim::plant {

SensorFrame ideal_measurement(const TrueState& s, double gravity, double time, bool gps_valid) {
    SensorFrame f;
    f.time = time;
    f.accel = rotate(inverse(s.attitude), s.acceleration - Vec3{0.0, 0.0, gravity});
    f.gyro = s.rates;
    f.gps_pos = s.position;
    f.gps_alt = -s.position.z;
    f.gps_valid = gps_valid;
    return f;
}

SensorModel::SensorModel(SensorNoise noise, std::uint64_t seed) : noise_(noise), rng_(seed) {}

double SensorModel::draw(double sigma) { return sigma * unit_(rng_); }

SensorFrame SensorModel::sense(const TrueState& s, double gravity, double time, bool gps_valid) {
    SensorFrame f = ideal_measurement(s, gravity, time, gps_valid);
    for (int i = 0; i < 3; ++i) f.accel[i] += draw(noise_.accel);
    for (int i = 0; i < 3; ++i) f.gyro[i] += draw(noise_.gyro);
    for (int i = 0; i < 3; ++i) f.gps_pos[i] += draw(noise_.gps_pos);
    f.gps_alt += draw(noise_.gps_alt);
    return f;
}

SensorFrame sense(const TrueState& s, const SensorNoise& noise, std::uint64_t seed, double gravity, double time) {
    SensorModel m(noise, seed);
    return m.sense(s, gravity, time, true);
}

}  // namespace quadsim::plant
