#include "quadsim/sim/scenario.hpp"

#include "quadsim/control/cascade.hpp"
#include "quadsim/sched/scheduler.hpp"

#include <toml.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace quadsim::sim {

using nlohmann::json;

namespace {

std::string where(const toml::node& n) {
    const auto& b = n.source().begin;
    if (b.line == 0) return {};
    return " (line " + std::to_string(b.line) + ")";
}

/// Reads keys from one table and remembers which were consumed, so leftovers
/// can be reported as unknown.
class Reader {
public:
    Reader(const toml::table& t, std::string path) : t_(t), path_(std::move(path)) {}

    std::string field(std::string_view key) const {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

    const toml::node* node(std::string_view key) {
        used_.insert(std::string(key));
        return t_.get(key);
    }

    double number(std::string_view key, double fallback) {
        const toml::node* n = node(key);
        if (!n) return fallback;
        return as_number(*n, field(key));
    }

    std::optional<double> opt_number(std::string_view key) {
        const toml::node* n = node(key);
        if (!n) return std::nullopt;
        return as_number(*n, field(key));
    }

    bool boolean(std::string_view key, bool fallback) {
        const toml::node* n = node(key);
        if (!n) return fallback;
        if (auto v = n->value_exact<bool>()) return *v;
        throw ValidationError(field(key), "expected a boolean" + where(*n));
    }

    std::optional<bool> opt_boolean(std::string_view key) {
        if (!t_.contains(key)) {
            used_.insert(std::string(key));
            return std::nullopt;
        }
        return boolean(key, false);
    }

    std::string string(std::string_view key, std::string fallback) {
        const toml::node* n = node(key);
        if (!n) return fallback;
        if (auto v = n->value_exact<std::string>()) return *v;
        throw ValidationError(field(key), "expected a string" + where(*n));
    }

    std::optional<std::string> opt_string(std::string_view key) {
        if (!t_.contains(key)) {
            used_.insert(std::string(key));
            return std::nullopt;
        }
        return string(key, {});
    }

    /// Three-element array, or a bare number when `scalar_ok` (x component).
    Vec3 vec3(std::string_view key, Vec3 fallback, bool scalar_ok = false) {
        const toml::node* n = node(key);
        if (!n) return fallback;
        if (scalar_ok && (n->is_integer() || n->is_floating_point())) {
            return {as_number(*n, field(key)), 0.0, 0.0};
        }
        const toml::array* a = n->as_array();
        if (!a || a->size() != 3) {
            throw ValidationError(field(key), "expected an array of 3 numbers" + where(*n));
        }
        Vec3 v;
        for (int i = 0; i < 3; ++i) v[i] = as_number(*a->get(static_cast<std::size_t>(i)), field(key));
        return v;
    }

    std::optional<Vec3> opt_vec3(std::string_view key) {
        if (!t_.contains(key)) {
            used_.insert(std::string(key));
            return std::nullopt;
        }
        return vec3(key, {});
    }

    const toml::table* table(std::string_view key) {
        const toml::node* n = node(key);
        if (!n) return nullptr;
        if (const auto* t = n->as_table()) return t;
        throw ValidationError(field(key), "expected a table" + where(*n));
    }

    const toml::array* array(std::string_view key) {
        const toml::node* n = node(key);
        if (!n) return nullptr;
        if (const auto* a = n->as_array()) return a;
        throw ValidationError(field(key), "expected an array of tables" + where(*n));
    }

    void finish() const {
        for (const auto& [k, v] : t_) {
            if (!used_.count(std::string(k.str()))) {
                throw ValidationError(field(k.str()), "unknown key" + where(v));
            }
        }
    }

private:
    static double as_number(const toml::node& n, const std::string& f) {
        if (auto i = n.value_exact<int64_t>()) return static_cast<double>(*i);
        if (auto d = n.value_exact<double>()) {
            if (!std::isfinite(*d)) throw ValidationError(f, "must be finite" + where(n));
            return *d;
        }
        throw ValidationError(f, "expected a number" + where(n));
    }

    const toml::table& t_;
    std::string path_;
    std::set<std::string> used_;
};

void read_initial(Reader r, InitialState& s) {
    s.position = r.vec3("position", s.position);
    s.velocity = r.vec3("velocity", s.velocity);
    const Vec3 att = r.vec3("attitude", {s.attitude.roll, s.attitude.pitch, s.attitude.yaw});
    s.attitude = {att.x, att.y, att.z};
    s.rates = r.vec3("rates", s.rates);
    r.finish();
}

void read_plant(Reader r, plant::PlantParams& p) {
    p.mass = r.number("mass", p.mass);
    p.inertia = r.vec3("inertia", p.inertia);
    p.arm_length = r.number("arm_length", p.arm_length);
    p.motor_thrust = r.number("motor_thrust", p.motor_thrust);
    p.yaw_coeff = r.number("yaw_coeff", p.yaw_coeff);
    p.drag = r.number("drag", p.drag);
    p.gravity = r.number("gravity", p.gravity);
    p.ground_contact = r.boolean("ground_contact", p.ground_contact);
    const std::string g = r.string("geometry", std::string(control::to_string(p.geometry)));
    const auto geo = control::frame_geometry_from_string(g);
    if (!geo) throw ValidationError(r.field("geometry"), "expected quad_x or quad_plus");
    p.geometry = *geo;
    r.finish();
}

void read_sensors(Reader r, SensorConfig& s) {
    s.noise.accel = r.number("accel_noise", s.noise.accel);
    s.noise.gyro = r.number("gyro_noise", s.noise.gyro);
    s.noise.gps_pos = r.number("gps_noise", s.noise.gps_pos);
    s.noise.gps_alt = r.number("alt_noise", s.noise.gps_alt);
    s.gps_rate = r.number("gps_rate", s.gps_rate);
    s.attitude_passthrough = r.boolean("attitude_passthrough", s.attitude_passthrough);
    r.finish();
}

void read_rates(Reader r, TaskRates& t) {
    t.estimator = r.number("estimator", t.estimator);
    t.position = r.number("position", t.position);
    t.velocity = r.number("velocity", t.velocity);
    t.attitude = r.number("attitude", t.attitude);
    t.rate = r.number("rate", t.rate);
    t.mixer = r.number("mixer", t.mixer);
    t.safety = r.number("safety", t.safety);
    t.logging = r.number("logging", t.logging);
    r.finish();
}

void read_params(const toml::table& t, std::map<std::string, double>& out) {
    Reader r(t, "params");
    for (const auto& [k, v] : t) {
        out[std::string(k.str())] = r.number(k.str(), 0.0);
    }
    r.finish();
}

void read_safety(Reader r, SafetyFlags& f) {
    f.armed = r.boolean("armed", f.armed);
    f.standby = r.boolean("standby", f.standby);
    f.forced_flight = r.boolean("forced_flight", f.forced_flight);
    f.angle_mode = r.boolean("angle_mode", f.angle_mode);
    f.flipping = r.boolean("flipping", f.flipping);
    f.autorotation = r.boolean("autorotation", f.autorotation);
    f.signing_required = r.boolean("signing_required", f.signing_required);
    r.finish();
}

void read_expect(Reader r, Expectations& e) {
    e.crash = r.opt_boolean("crash");
    if (auto s = r.opt_string("failsafe_stage")) {
        e.failsafe_stage = safety::failsafe_stage_from_string(*s);
        if (!e.failsafe_stage) {
            throw ValidationError(r.field("failsafe_stage"), "expected none, disarmed_min_thrust or shutdown");
        }
    }
    e.diverged = r.opt_boolean("diverged");
    e.max_rms_error = r.opt_number("max_rms_error");
    e.max_final_error = r.opt_number("max_final_error");
    e.max_lean = r.opt_number("max_lean");
    r.finish();
}

attack::FlightMode read_mode(Reader& r, attack::FlightMode fallback) {
    const auto s = r.opt_string("mode");
    if (!s) return fallback;
    const auto m = attack::flight_mode_from_string(*s);
    if (!m) throw ValidationError(r.field("mode"), "expected guided, auto or pilot");
    return *m;
}

Waypoint read_waypoint(Reader r) {
    Waypoint w;
    w.time = r.number("time", 0.0);
    w.position = r.vec3("position", w.position);
    w.velocity = r.opt_vec3("velocity");
    w.yaw = r.number("yaw", 0.0);
    w.yaw_rate = r.number("yaw_rate", 0.0);
    w.mode = read_mode(r, w.velocity ? attack::FlightMode::pilot : attack::FlightMode::guided);
    r.finish();
    return w;
}

attack::CommandMessage read_command(Reader& r) {
    attack::CommandMessage m;
    const std::string kind = r.string("kind", "");
    const auto k = attack::command_kind_from_string(kind);
    if (!k) throw ValidationError(r.field("kind"), "unknown command kind '" + kind + "'");
    m.kind = *k;
    m.position = r.vec3("position", m.position);
    if (const toml::node* n = r.node("channels")) {
        const toml::array* a = n->as_array();
        if (!a || a->size() != 4) throw ValidationError(r.field("channels"), "expected 4 PWM values" + where(*n));
        for (std::size_t i = 0; i < 4; ++i) {
            auto v = a->get(i)->value_exact<int64_t>();
            if (!v) throw ValidationError(r.field("channels"), "expected integers" + where(*n));
            m.channels[i] = static_cast<int>(*v);
        }
    }
    m.count = static_cast<int>(r.number("count", 0.0));
    m.index = static_cast<int>(r.number("index", 0.0));
    m.param_name = r.string("param", "");
    m.param_value = r.number("value", 0.0);
    m.bound_override = r.boolean("bound_override", false);
    m.source = r.string("source", "gcs");
    m.is_signed = r.boolean("signed", false);
    return m;
}

attack::AttackEvent read_attack(Reader r, double duration) {
    attack::AttackEvent e;
    e.time = r.number("time", 0.0);
    const std::string type = r.string("type", "");
    if (type == "command") {
        e.action = read_command(r);
    } else if (type == "spoof") {
        attack::SpoofProfile p;
        const std::string sensor = r.string("sensor", "gps_pos");
        const auto t = attack::spoof_target_from_string(sensor);
        if (!t) throw ValidationError(r.field("sensor"), "expected gps_pos, gps_alt, accel or gyro");
        p.target = *t;
        const std::string shape = r.string("shape", "bias");
        const auto s = attack::spoof_shape_from_string(shape);
        if (!s) throw ValidationError(r.field("shape"), "expected bias, ramp or replay");
        p.shape = *s;
        p.bias = r.vec3("bias", {}, true);
        p.slope = r.vec3("slope", {}, true);
        p.delay = r.number("delay", 0.0);
        p.start = e.time;
        p.stop = r.number("stop", duration);
        e.action = p;
    } else if (type == "stall") {
        e.action = attack::StallAction{r.number("duration", 0.0)};
    } else if (type == "limit_shift") {
        e.action = attack::LimitShiftAction{r.number("d_min", 0.0), r.number("d_max", 0.0)};
    } else if (type == "torque_bias") {
        attack::TorqueBiasAction a;
        a.torque = r.vec3("torque", {});
        a.frequency = r.number("frequency", 0.0);
        a.duration = r.number("duration", 0.0);
        e.action = a;
    } else {
        throw ValidationError(r.field("type"), "unknown attack type '" + type + "'");
    }
    r.finish();
    try {
        attack::validate(e);
    } catch (const attack::AttackConfigError& ex) {
        throw ValidationError(r.field("type"), ex.what());
    }
    return e;
}

json vec(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json attack_json(const attack::AttackEvent& e) {
    json j{{"time", e.time}, {"type", attack::action_name(e.action)}};
    if (const auto* m = std::get_if<attack::CommandMessage>(&e.action)) {
        j["kind"] = attack::to_string(m->kind);
        j["position"] = vec(m->position);
        j["channels"] = m->channels;
        j["count"] = m->count;
        j["index"] = m->index;
        j["param"] = m->param_name;
        j["value"] = m->param_value;
        j["bound_override"] = m->bound_override;
        j["source"] = m->source;
        j["signed"] = m->is_signed;
    } else if (const auto* p = std::get_if<attack::SpoofProfile>(&e.action)) {
        j["sensor"] = attack::to_string(p->target);
        j["shape"] = attack::to_string(p->shape);
        j["bias"] = vec(p->bias);
        j["slope"] = vec(p->slope);
        j["delay"] = p->delay;
        j["stop"] = p->stop;
    } else if (const auto* s = std::get_if<attack::StallAction>(&e.action)) {
        j["duration"] = s->duration;
    } else if (const auto* l = std::get_if<attack::LimitShiftAction>(&e.action)) {
        j["d_min"] = l->d_min;
        j["d_max"] = l->d_max;
    } else if (const auto* t = std::get_if<attack::TorqueBiasAction>(&e.action)) {
        j["torque"] = vec(t->torque);
        j["frequency"] = t->frequency;
        j["duration"] = t->duration;
    }
    return j;
}

}  // namespace

Scenario default_scenario() {
    Scenario s;
    s.plant.ground_contact = true;
    return s;
}

void validate(const Scenario& s) {
    if (!(s.duration > 0.0)) throw ValidationError("duration", "must be > 0");

    try {
        plant::validate(s.plant);
    } catch (const std::invalid_argument& e) {
        throw ValidationError("plant", e.what());
    }

    ParamRegistry reg = default_params();
    for (const auto& [name, value] : s.params) {
        if (!reg.contains(name)) throw ValidationError("params." + name, "unknown parameter");
        const Param& p = reg.at(name);
        if (value < p.min || value > p.max) {
            std::ostringstream os;
            os << "value " << value << " outside bounds [" << p.min << ", " << p.max << "]";
            throw ValidationError("params." + name, os.str());
        }
        reg.set(name, value, ParamSource::gcs);
    }
    const double base = reg.get(param::kLoopRate);

    const auto gains = control::gains_from_params(reg);
    if (control::sqrt_branch_mismatch(gains.sqrt_ctrl) >= 0.05) {
        throw ValidationError("params.ATC_SQRT_W_MAX",
                              "square-root and linear attitude branches differ by 5% or more at the threshold");
    }

    const std::pair<const char*, double> rates[] = {
        {"rates.estimator", s.rates.estimator}, {"rates.position", s.rates.position},
        {"rates.velocity", s.rates.velocity},   {"rates.attitude", s.rates.attitude},
        {"rates.rate", s.rates.rate},           {"rates.mixer", s.rates.mixer},
        {"rates.safety", s.rates.safety},       {"rates.logging", s.rates.logging},
    };
    for (const auto& [field, r] : rates) {
        if (!(r >= 1.0 && r <= base)) {
            throw ValidationError(field, "rate must lie in [1, SCHED_LOOP_RATE]");
        }
    }

    const auto& n = s.sensors.noise;
    if (n.accel < 0 || n.gyro < 0 || n.gps_pos < 0 || n.gps_alt < 0) {
        throw ValidationError("sensors", "noise levels must be >= 0");
    }
    if (!(s.sensors.gps_rate > 0.0 && s.sensors.gps_rate <= s.rates.estimator)) {
        throw ValidationError("sensors.gps_rate", "must lie in (0, estimator rate]");
    }

    for (std::size_t i = 0; i < s.waypoints.size(); ++i) {
        const Waypoint& w = s.waypoints[i];
        if (w.time < 0.0) throw ValidationError("waypoints", "negative waypoint time");
        if (i > 0 && !(w.time > s.waypoints[i - 1].time)) {
            throw ValidationError("waypoints", "waypoints not increasing");
        }
        if (w.mode == attack::FlightMode::pilot && !w.velocity) {
            throw ValidationError("waypoints", "pilot-mode entry needs a velocity");
        }
    }

    for (const auto& e : s.attacks) {
        try {
            attack::validate(e);
        } catch (const attack::AttackConfigError& ex) {
            throw ValidationError("attacks", ex.what());
        }
    }
}

Scenario parse_scenario(std::string_view text, const std::string& source_name) {
    toml::table root;
    try {
        root = toml::parse(text, source_name);
    } catch (const toml::parse_error& e) {
        const auto& b = e.source().begin;
        throw ParseError(source_name + ":" + std::to_string(b.line) + ":" + std::to_string(b.column) + ": " +
                         std::string(e.description()));
    }

    Scenario s = default_scenario();
    Reader r(root, "");
    s.name = r.string("name", s.name);
    s.duration = r.number("duration", s.duration);
    const double seed = r.number("seed", static_cast<double>(s.seed));
    if (seed < 0 || seed != std::floor(seed)) throw ValidationError("seed", "must be a non-negative integer");
    s.seed = static_cast<std::uint64_t>(seed);
    s.attack_module = r.boolean("attack_module", s.attack_module);

    if (const auto* t = r.table("initial")) read_initial(Reader(*t, "initial"), s.initial);
    if (const auto* t = r.table("plant")) read_plant(Reader(*t, "plant"), s.plant);
    if (const auto* t = r.table("sensors")) read_sensors(Reader(*t, "sensors"), s.sensors);
    if (const auto* t = r.table("rates")) read_rates(Reader(*t, "rates"), s.rates);
    if (const auto* t = r.table("params")) read_params(*t, s.params);
    if (const auto* t = r.table("safety")) read_safety(Reader(*t, "safety"), s.safety);
    if (const auto* t = r.table("expect")) read_expect(Reader(*t, "expect"), s.expect);

    if (const auto* a = r.array("waypoints")) {
        for (std::size_t i = 0; i < a->size(); ++i) {
            const auto* t = a->get(i)->as_table();
            if (!t) throw ValidationError("waypoints", "entries must be tables");
            s.waypoints.push_back(read_waypoint(Reader(*t, "waypoints[" + std::to_string(i) + "]")));
        }
    }
    if (const auto* a = r.array("attacks")) {
        for (std::size_t i = 0; i < a->size(); ++i) {
            const auto* t = a->get(i)->as_table();
            if (!t) throw ValidationError("attacks", "entries must be tables");
            s.attacks.push_back(read_attack(Reader(*t, "attacks[" + std::to_string(i) + "]"), s.duration));
        }
    }
    r.finish();

    validate(s);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read scenario file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path.string());
}

json to_json(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["duration"] = s.duration;
    j["initial"] = {{"position", vec(s.initial.position)},
                    {"velocity", vec(s.initial.velocity)},
                    {"attitude", json::array({s.initial.attitude.roll, s.initial.attitude.pitch, s.initial.attitude.yaw})},
                    {"rates", vec(s.initial.rates)}};
    j["plant"] = {{"mass", s.plant.mass},
                  {"inertia", vec(s.plant.inertia)},
                  {"arm_length", s.plant.arm_length},
                  {"motor_thrust", s.plant.motor_thrust},
                  {"yaw_coeff", s.plant.yaw_coeff},
                  {"drag", s.plant.drag},
                  {"gravity", s.plant.gravity},
                  {"ground_contact", s.plant.ground_contact},
                  {"geometry", control::to_string(s.plant.geometry)}};
    j["sensors"] = {{"accel_noise", s.sensors.noise.accel},
                    {"gyro_noise", s.sensors.noise.gyro},
                    {"gps_noise", s.sensors.noise.gps_pos},
                    {"alt_noise", s.sensors.noise.gps_alt},
                    {"gps_rate", s.sensors.gps_rate},
                    {"attitude_passthrough", s.sensors.attitude_passthrough}};
    j["rates"] = {{"estimator", s.rates.estimator}, {"position", s.rates.position}, {"velocity", s.rates.velocity},
                  {"attitude", s.rates.attitude},   {"rate", s.rates.rate},         {"mixer", s.rates.mixer},
                  {"safety", s.rates.safety},       {"logging", s.rates.logging}};
    j["params"] = s.params;
    j["safety"] = {{"armed", s.safety.armed},
                   {"standby", s.safety.standby},
                   {"forced_flight", s.safety.forced_flight},
                   {"angle_mode", s.safety.angle_mode},
                   {"flipping", s.safety.flipping},
                   {"autorotation", s.safety.autorotation},
                   {"signing_required", s.safety.signing_required}};
    json wps = json::array();
    for (const auto& w : s.waypoints) {
        json wj{{"time", w.time}, {"position", vec(w.position)}, {"yaw", w.yaw}, {"yaw_rate", w.yaw_rate},
                {"mode", attack::to_string(w.mode)}};
        if (w.velocity) wj["velocity"] = vec(*w.velocity);
        wps.push_back(wj);
    }
    j["waypoints"] = wps;
    json atk = json::array();
    for (const auto& e : s.attacks) atk.push_back(attack_json(e));
    j["attacks"] = atk;
    json ex = json::object();
    if (s.expect.crash) ex["crash"] = *s.expect.crash;
    if (s.expect.failsafe_stage) ex["failsafe_stage"] = safety::to_string(*s.expect.failsafe_stage);
    if (s.expect.diverged) ex["diverged"] = *s.expect.diverged;
    if (s.expect.max_rms_error) ex["max_rms_error"] = *s.expect.max_rms_error;
    if (s.expect.max_final_error) ex["max_final_error"] = *s.expect.max_final_error;
    if (s.expect.max_lean) ex["max_lean"] = *s.expect.max_lean;
    j["expect"] = ex;
    return j;
}

}  // namespace quadsim::sim
