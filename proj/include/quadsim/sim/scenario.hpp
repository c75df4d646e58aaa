#pragma once

#include "quadsim/attack/tamper.hpp"
#include "quadsim/plant/sensors.hpp"
#include "quadsim/safety/safety.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace quadsim::sim {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed file; the message carries the line (and column) when known.
class ParseError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Well-formed file with a bad value; `field()` names the offending key.
class ValidationError : public ConfigError {
public:
    ValidationError(std::string field, const std::string& what)
        : ConfigError(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct InitialState {
    Vec3 position{0.0, 0.0, -5.0};
    Vec3 velocity{};
    EulerAngles attitude{};
    Vec3 rates{};
};

struct TaskRates {
    double estimator{400.0};
    double position{50.0};
    double velocity{100.0};
    double attitude{400.0};
    double rate{400.0};
    double mixer{400.0};
    double safety{10.0};
    double logging{10.0};
};

struct SensorConfig {
    plant::SensorNoise noise{};
    double gps_rate{10.0};
    /// Attitude taken from truth; false selects the complementary filter.
    bool attitude_passthrough{true};
};

/// Target plan entry; becomes active at `time`. Position waypoints drive the
/// full cascade; a velocity entry switches to pilot-style velocity control.
struct Waypoint {
    double time{0.0};
    Vec3 position{};
    std::optional<Vec3> velocity;
    double yaw{0.0};
    double yaw_rate{0.0};
    attack::FlightMode mode{attack::FlightMode::guided};
};

struct SafetyFlags {
    bool armed{true};
    bool standby{false};
    bool forced_flight{false};
    bool angle_mode{true};
    bool flipping{false};
    bool autorotation{false};
    bool signing_required{false};
};

/// Declared outcomes checked against the report.
struct Expectations {
    std::optional<bool> crash;
    std::optional<safety::FailsafeStage> failsafe_stage;
    std::optional<bool> diverged;
    std::optional<double> max_rms_error;
    std::optional<double> max_final_error;
    std::optional<double> max_lean;

    bool empty() const {
        return !crash && !failsafe_stage && !diverged && !max_rms_error && !max_final_error && !max_lean;
    }
};

struct Scenario {
    std::string name{"scenario"};
    double duration{10.0};
    std::uint64_t seed{1};
    plant::PlantParams plant{};
    InitialState initial{};
    std::map<std::string, double> params;
    TaskRates rates{};
    SensorConfig sensors{};
    std::vector<Waypoint> waypoints;
    std::vector<attack::AttackEvent> attacks;
    SafetyFlags safety{};
    Expectations expect{};
    /// Detached means the attack list is never consulted.
    bool attack_module{true};
};

/// Scenario with the engine defaults (ground contact on, hold at the start
/// position).
Scenario default_scenario();

/// Range and ordering checks; throws ValidationError.
void validate(const Scenario& s);

Scenario parse_scenario(std::string_view toml_text, const std::string& source_name = "<string>");
Scenario load_scenario(const std::filesystem::path& path);

/// Fully resolved configuration (used as the telemetry header). The seed is
/// reported separately so a seed change does not alter this echo.
nlohmann::json to_json(const Scenario& s);

}  // namespace quadsim::sim
