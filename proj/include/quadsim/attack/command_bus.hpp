#pragma once

#include "quadsim/core/params.hpp"
#include "quadsim/core/vec3.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace quadsim::attack {

enum class CommandKind {
    heartbeat,
    mission_count,
    mission_item,
    mission_start,
    set_home,
    rc_override,
    do_reposition,
    param_set,
};

std::string_view to_string(CommandKind k);
std::optional<CommandKind> command_kind_from_string(std::string_view s);

enum class FlightMode { guided, auto_mission, pilot };

std::string_view to_string(FlightMode m);
std::optional<FlightMode> flight_mode_from_string(std::string_view s);

/// RC channel order: roll, pitch, throttle, yaw (PWM microseconds).
inline constexpr int kRcMin = 1000;
inline constexpr int kRcMid = 1500;
inline constexpr int kRcMax = 2000;

struct CommandMessage {
    CommandKind kind{CommandKind::heartbeat};
    /// DO_REPOSITION, SET_HOME, MISSION_ITEM (NED, m).
    Vec3 position{};
    std::array<int, 4> channels{kRcMid, kRcMid, kRcMid, kRcMid};
    /// MISSION_COUNT
    int count{0};
    /// MISSION_ITEM
    int index{0};
    std::string param_name;
    double param_value{0.0};
    /// PARAM_SET from an attacker may push a value past its bounds.
    bool bound_override{false};
    std::string source{"gcs"};
    bool is_signed{false};
};

/// Maps a source id onto the parameter-log source ("attacker", "pilot",
/// anything else counts as gcs).
ParamSource param_source_for(std::string_view source_id);

enum class CommandStatus {
    accepted,
    rejected_unsigned,
    protocol_violation,
    invalid_payload,
    unknown_param,
    out_of_range,
};

std::string_view to_string(CommandStatus s);

struct PilotInput {
    /// Heading frame: x forward, y right, z down (m/s).
    Vec3 velocity{};
    double yaw_rate{0.0};
};

struct MissionState {
    int expected{0};
    std::vector<std::optional<Vec3>> items;
    bool started{false};
    std::size_t current{0};
};

struct CommandRecord {
    double time{0.0};
    CommandKind kind{};
    std::string source;
    CommandStatus status{};
};

struct BusState {
    bool signing_required{false};
    FlightMode mode{FlightMode::guided};
    Vec3 guided_target{};
    Vec3 home{};
    PilotInput pilot{};
    MissionState mission{};
    std::optional<double> last_heartbeat;
    std::vector<CommandRecord> log;
};

/// Limits used to turn stick deflection into velocity and yaw-rate demands.
struct StickScale {
    double vel_xy_max{5.0};
    double vel_z_max{2.5};
    double yaw_rate_max{1.5};
};

/// Linear stick map: 1000..2000 us onto [-max, max]. Pitch stick low means
/// forward; throttle stick high means climb (negative D velocity).
PilotInput rc_to_pilot(const std::array<int, 4>& channels, const StickScale& scale);

/// Routes one message. PARAM_SET goes through the registry's single write
/// path. Every message, accepted or not, is appended to bus.log.
CommandStatus inject_command(BusState& bus, const CommandMessage& msg, ParamRegistry& params, double time,
                             const StickScale& sticks = {});

}  // namespace quadsim::attack
