#include "quadsim/attack/command_bus.hpp"

#include <algorithm>
#include <cmath>

namespace quadsim::attack {

namespace {

constexpr std::array<std::pair<CommandKind, std::string_view>, 8> kKindNames{{
    {CommandKind::heartbeat, "HEARTBEAT"},
    {CommandKind::mission_count, "MISSION_COUNT"},
    {CommandKind::mission_item, "MISSION_ITEM"},
    {CommandKind::mission_start, "MISSION_START"},
    {CommandKind::set_home, "SET_HOME"},
    {CommandKind::rc_override, "RC_OVERRIDE"},
    {CommandKind::do_reposition, "DO_REPOSITION"},
    {CommandKind::param_set, "PARAM_SET"},
}};

double stick(int pwm) {
    return std::clamp((pwm - kRcMid) / double(kRcMax - kRcMid), -1.0, 1.0);
}

CommandStatus route(BusState& bus, const CommandMessage& msg, ParamRegistry& params, double time,
                    const StickScale& sticks) {
    switch (msg.kind) {
        case CommandKind::heartbeat:
            bus.last_heartbeat = time;
            return CommandStatus::accepted;

        case CommandKind::do_reposition:
            if (!is_finite(msg.position)) return CommandStatus::invalid_payload;
            bus.guided_target = msg.position;
            bus.mode = FlightMode::guided;
            return CommandStatus::accepted;

        case CommandKind::set_home:
            if (!is_finite(msg.position)) return CommandStatus::invalid_payload;
            bus.home = msg.position;
            return CommandStatus::accepted;

        case CommandKind::rc_override:
            for (int c : msg.channels) {
                if (c < kRcMin || c > kRcMax) return CommandStatus::invalid_payload;
            }
            bus.pilot = rc_to_pilot(msg.channels, sticks);
            bus.mode = FlightMode::pilot;
            return CommandStatus::accepted;

        case CommandKind::mission_count:
            if (msg.count <= 0) return CommandStatus::invalid_payload;
            bus.mission = MissionState{};
            bus.mission.expected = msg.count;
            bus.mission.items.assign(static_cast<std::size_t>(msg.count), std::nullopt);
            return CommandStatus::accepted;

        case CommandKind::mission_item:
            if (msg.index < 0 || msg.index >= bus.mission.expected) return CommandStatus::protocol_violation;
            if (!is_finite(msg.position)) return CommandStatus::invalid_payload;
            bus.mission.items[static_cast<std::size_t>(msg.index)] = msg.position;
            return CommandStatus::accepted;

        case CommandKind::mission_start: {
            const auto& items = bus.mission.items;
            const bool complete = bus.mission.expected > 0 &&
                                  std::all_of(items.begin(), items.end(), [](const auto& i) { return i.has_value(); });
            if (!complete) return CommandStatus::protocol_violation;
            bus.mission.started = true;
            bus.mission.current = 0;
            bus.mode = FlightMode::auto_mission;
            return CommandStatus::accepted;
        }

        case CommandKind::param_set:
            switch (params.set(msg.param_name, msg.param_value, param_source_for(msg.source), time,
                               msg.bound_override)) {
                case ParamSetStatus::ok: return CommandStatus::accepted;
                case ParamSetStatus::unknown_param: return CommandStatus::unknown_param;
                case ParamSetStatus::out_of_range: return CommandStatus::out_of_range;
            }
    }
    return CommandStatus::invalid_payload;
}

}  // namespace

std::string_view to_string(CommandKind k) {
    for (const auto& [kind, name] : kKindNames) {
        if (kind == k) return name;
    }
    return "?";
}

std::optional<CommandKind> command_kind_from_string(std::string_view s) {
    for (const auto& [kind, name] : kKindNames) {
        if (name == s) return kind;
    }
    return std::nullopt;
}

std::string_view to_string(FlightMode m) {
    switch (m) {
        case FlightMode::guided: return "guided";
        case FlightMode::auto_mission: return "auto";
        case FlightMode::pilot: return "pilot";
    }
    return "?";
}

std::optional<FlightMode> flight_mode_from_string(std::string_view s) {
    if (s == "guided") return FlightMode::guided;
    if (s == "auto") return FlightMode::auto_mission;
    if (s == "pilot") return FlightMode::pilot;
    return std::nullopt;
}

ParamSource param_source_for(std::string_view source_id) {
    if (source_id == "attacker") return ParamSource::attacker;
    if (source_id == "pilot") return ParamSource::pilot;
    return ParamSource::gcs;
}

std::string_view to_string(CommandStatus s) {
    switch (s) {
        case CommandStatus::accepted: return "accepted";
        case CommandStatus::rejected_unsigned: return "rejected_unsigned";
        case CommandStatus::protocol_violation: return "protocol_violation";
        case CommandStatus::invalid_payload: return "invalid_payload";
        case CommandStatus::unknown_param: return "unknown_param";
        case CommandStatus::out_of_range: return "out_of_range";
    }
    return "?";
}

PilotInput rc_to_pilot(const std::array<int, 4>& ch, const StickScale& s) {
    PilotInput p;
    p.velocity.y = stick(ch[0]) * s.vel_xy_max;
    p.velocity.x = -stick(ch[1]) * s.vel_xy_max;
    p.velocity.z = -stick(ch[2]) * s.vel_z_max;
    p.yaw_rate = stick(ch[3]) * s.yaw_rate_max;
    return p;
}

CommandStatus inject_command(BusState& bus, const CommandMessage& msg, ParamRegistry& params, double time,
                             const StickScale& sticks) {
    const CommandStatus status = (bus.signing_required && !msg.is_signed)
                                     ? CommandStatus::rejected_unsigned
                                     : route(bus, msg, params, time, sticks);
    bus.log.push_back({time, msg.kind, msg.source, status});
    return status;
}

}  // namespace quadsim::attack
