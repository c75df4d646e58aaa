#include "quadsim/sim/engine.hpp"

#include <algorithm>
#include <cmath>

namespace quadsim::sim {

using nlohmann::json;

namespace {

json quat_json(const Quaternion& q) { return json::array({q.w, q.x, q.y, q.z}); }

Vec3 heading_to_ned(const Vec3& v, double yaw) { return control::ned_to_heading(v, -yaw); }

double effective_rate(double base, double rate) { return base / std::ceil(base / rate - 1e-9); }

}  // namespace

std::string_view to_string(EndReason r) {
    switch (r) {
        case EndReason::running: return "running";
        case EndReason::duration: return "duration";
        case EndReason::shutdown: return "shutdown";
        case EndReason::diverged: return "diverged";
    }
    return "?";
}

Engine::Engine(Scenario scenario, EngineOptions options)
    : scenario_(std::move(scenario)),
      options_(options),
      params_(default_params()),
      sensors_(scenario_.sensors.noise, scenario_.seed) {
    validate(scenario_);
    const Scenario& s = scenario_;

    if (!s.params.count(std::string(param::kThrustHover))) {
        const Param& hover = params_.at(param::kThrustHover);
        params_.set(param::kThrustHover, std::clamp(s.plant.hover_throttle(), hover.min, hover.max), ParamSource::gcs);
    }
    for (const auto& [name, value] : s.params) {
        params_.set(name, value, ParamSource::gcs);
    }

    if (scenario_.waypoints.empty()) {
        Waypoint w;
        w.position = s.initial.position;
        w.yaw = s.initial.attitude.yaw;
        scenario_.waypoints.push_back(w);
    }

    if (s.attack_module) {
        attack_order_.resize(s.attacks.size());
        for (std::size_t i = 0; i < attack_order_.size(); ++i) attack_order_[i] = i;
        std::stable_sort(attack_order_.begin(), attack_order_.end(),
                         [&s](std::size_t a, std::size_t b) { return s.attacks[a].time < s.attacks[b].time; });
        double horizon = 0.0;
        for (const auto& e : s.attacks) {
            if (const auto* p = std::get_if<attack::SpoofProfile>(&e.action)) horizon = std::max(horizon, p->delay);
        }
        history_.set_horizon(horizon + 1.0);
    }

    const Quaternion q0 = quat_from_euler(s.initial.attitude);
    truth_.position = s.initial.position;
    truth_.velocity = s.initial.velocity;
    truth_.attitude = q0;
    truth_.rates = s.initial.rates;

    const double r_pos = params_.get(param::kEkfPosNoise);
    bank_ = estimator::make_bank(s.initial.position, s.initial.velocity, q0, r_pos * r_pos, 0.25);
    bank_.attitude_passthrough = s.sensors.attitude_passthrough;

    refresh_gains();
    cascade_.prev_yaw_target = wrap_pi(s.initial.attitude.yaw);
    q_target_ = q0;
    lean_target_ = s.initial.attitude;

    bus_.signing_required = s.safety.signing_required;
    bus_.guided_target = s.initial.position;
    bus_.home = s.initial.position;
    armed_ = s.safety.armed;

    build_scheduler();

    json header{{"type", "header"},
                {"format", "quadsim-telemetry"},
                {"version", 1},
                {"seed", s.seed},
                {"base_rate", sched_->base_rate()},
                {"config", to_json(scenario_)}};
    json resolved = json::object();
    for (const auto& [name, p] : params_.params()) resolved[name] = p.value;
    header["resolved_params"] = resolved;
    log_.append(header);
}

Engine::~Engine() = default;

const sched::Scheduler& Engine::scheduler() const { return *sched_; }
double Engine::time() const { return sched_->now(); }
double Engine::base_rate() const { return sched_->base_rate(); }

void Engine::build_scheduler() {
    const double base = params_.get(param::kLoopRate);
    sched_ = std::make_unique<sched::Scheduler>(base);
    const TaskRates& r = scenario_.rates;
    using sched::Priority;
    auto add = [this](const char* name, double rate, Priority p, void (Engine::*fn)(const sched::TaskContext&)) {
        sched_->add_task({name, rate, p, [this, fn](const sched::TaskContext& c) { (this->*fn)(c); }});
    };
    add("estimator", r.estimator, Priority::estimator, &Engine::estimator_task);
    add("position", r.position, Priority::position, &Engine::position_task);
    add("velocity", r.velocity, Priority::velocity, &Engine::velocity_task);
    add("attitude", r.attitude, Priority::attitude, &Engine::attitude_task);
    add("rate", r.rate, Priority::rate, &Engine::rate_task);
    add("mixer", r.mixer, Priority::mixer, &Engine::mixer_task);
    add("safety", r.safety, Priority::safety, &Engine::safety_task);
    add("logging", r.logging, Priority::logging, &Engine::logging_task);
    sched_->set_tick_hook([this](const sched::TickInfo& info) { tick_hook(info); });

    const double est_rate = effective_rate(base, r.estimator);
    gps_every_ = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(est_rate / scenario_.sensors.gps_rate)));
    total_ticks_ = static_cast<std::uint64_t>(std::floor(scenario_.duration * base + 1e-9));
}

bool Engine::step() {
    if (finished()) return false;
    if (sched_->ticks() >= total_ticks_) {
        finish(EndReason::duration);
        return false;
    }
    const double t = sched_->now();
    activate_waypoints(t);
    if (scenario_.attack_module) fire_due_attacks(t);
    refresh_gains();
    sched_->tick();
    if (end_ == EndReason::running && safety_.stage == safety::FailsafeStage::shutdown) {
        finish(EndReason::shutdown);
    }
    return !finished();
}

void Engine::run() {
    while (step()) {
    }
}

void Engine::run_until(double t) {
    while (!finished() && sched_->now() < t - 1e-12) {
        step();
    }
}

void Engine::refresh_gains() {
    if (params_.version() == gains_version_) return;
    cascade_.gains = control::gains_from_params(params_, scenario_.plant.geometry);
    gains_version_ = params_.version();
}

Vec3 Engine::position_target() const {
    switch (bus_.mode) {
        case attack::FlightMode::pilot: return bank_.position();
        case attack::FlightMode::auto_mission:
            if (bus_.mission.started && bus_.mission.current < bus_.mission.items.size()) {
                return *bus_.mission.items[bus_.mission.current];
            }
            return bus_.guided_target;
        case attack::FlightMode::guided: return bus_.guided_target;
    }
    return bus_.guided_target;
}

bool Engine::motors_active() const {
    return armed_ && std::any_of(motor_cmd_.u.begin(), motor_cmd_.u.end(), [](double u) { return u > 0.0; });
}

// -- plan and attacks ----------------------------------------------------------

void Engine::activate_waypoints(double t) {
    const auto& wps = scenario_.waypoints;
    while (next_waypoint_ < wps.size() && wps[next_waypoint_].time <= t + 1e-12) {
        const Waypoint& w = wps[next_waypoint_];
        if (w.mode == attack::FlightMode::pilot) {
            bus_.mode = attack::FlightMode::pilot;
            plan_velocity_ = w.velocity.value_or(Vec3{});
            plan_yaw_rate_ = w.yaw_rate;
            rc_velocity_ = false;
        } else {
            bus_.mode = w.mode;
            bus_.guided_target = w.position;
            plan_yaw_ = w.yaw;
        }
        if (next_waypoint_ > 0) {
            log_event(t, "waypoint", {{"index", next_waypoint_}, {"mode", attack::to_string(w.mode)}});
        }
        ++next_waypoint_;
    }
}

void Engine::fire_due_attacks(double t) {
    while (next_attack_ < attack_order_.size() &&
           scenario_.attacks[attack_order_[next_attack_]].time <= t + 1e-12) {
        const std::size_t i = attack_order_[next_attack_];
        fire(scenario_.attacks[i], i, t);
        ++next_attack_;
    }
}

void Engine::fire(const attack::AttackEvent& e, std::size_t index, double t) {
    json f{{"index", index}, {"attack", attack::action_name(e.action)}};

    if (const auto* m = std::get_if<attack::CommandMessage>(&e.action)) {
        const attack::StickScale sticks{params_.get(param::kPilotVelXYMax), params_.get(param::kPilotVelZMax),
                                        params_.get(param::kRateYMax)};
        const auto status = attack::inject_command(bus_, *m, params_, t, sticks);
        if (status == attack::CommandStatus::accepted && m->kind == attack::CommandKind::rc_override) {
            rc_velocity_ = true;
        }
        f["command"] = attack::to_string(m->kind);
        f["source"] = m->source;
        f["signed"] = m->is_signed;
        f["status"] = attack::to_string(status);
        if (m->kind == attack::CommandKind::param_set) {
            f["param"] = m->param_name;
            f["value"] = m->param_value;
        }
    } else if (const auto* p = std::get_if<attack::SpoofProfile>(&e.action)) {
        spoofs_.push_back(*p);
        f["sensor"] = attack::to_string(p->target);
        f["shape"] = attack::to_string(p->shape);
        f["stop"] = p->stop;
        f["status"] = "active";
    } else if (const auto* s = std::get_if<attack::StallAction>(&e.action)) {
        attack::induce_stall(*sched_, t, s->duration);
        f["duration"] = s->duration;
        f["status"] = "registered";
    } else if (const auto* l = std::get_if<attack::LimitShiftAction>(&e.action)) {
        f["d_min"] = l->d_min;
        f["d_max"] = l->d_max;
        try {
            const auto lim = attack::apply_limit_shift(
                control::OutputLimits{params_.get(param::kMotOutMin), params_.get(param::kMotOutMax)}, l->d_min,
                l->d_max);
            params_.set(param::kMotOutMin, lim.lo, ParamSource::attacker, t, true);
            params_.set(param::kMotOutMax, lim.hi, ParamSource::attacker, t, true);
            f["limits"] = json::array({lim.lo, lim.hi});
            f["status"] = "applied";
        } catch (const attack::InvertedLimits&) {
            f["status"] = "inverted_limits";
        }
    } else if (const auto* b = std::get_if<attack::TorqueBiasAction>(&e.action)) {
        torque_biases_.push_back({*b, t});
        f["torque"] = json_vec(b->torque);
        f["frequency"] = b->frequency;
        f["status"] = "active";
    }
    log_event(t, "attack", std::move(f));
}

// -- tasks ---------------------------------------------------------------------

void Engine::estimator_task(const sched::TaskContext& c) {
    const double g = scenario_.plant.gravity;
    const bool gps_due = estimator_runs_ % gps_every_ == 0;
    ++estimator_runs_;

    const plant::SensorFrame clean = sensors_.sense(truth_, g, c.time, gps_due);
    plant::SensorFrame measured = clean;
    bool spoof_active = false;
    if (!spoofs_.empty()) {
        const auto r = attack::spoof_sensor(clean, spoofs_, c.time, history_);
        measured = r.frame;
        spoof_active = r.any_active;
        if (r.replay_underrun && !underrun_logged_) {
            log_event(c.time, "replay_underrun");
            underrun_logged_ = true;
        }
        history_.push(clean);
    }
    if (options_.record_sensors) sensor_log_.push_back({clean, measured});
    frame_ = measured;

    estimator::step_attitude(bank_, measured.gyro, measured.accel, c.dt, params_.get(param::kAhrsCompGain),
                             truth_.attitude);
    accel_ned_ = estimator::linear_accel_ned(bank_.attitude, measured.accel, g);

    const double q_sigma = params_.get(param::kEkfAccNoise);
    const double r_pos = params_.get(param::kEkfPosNoise);
    const double r_alt = params_.get(param::kEkfAltNoise);
    for (int i = 0; i < 3; ++i) {
        auto& a = bank_.axes[static_cast<std::size_t>(i)];
        a.Q = estimator::process_noise(q_sigma, c.dt);
        a.R = i == estimator::down ? r_alt * r_alt : r_pos * r_pos;
    }
    bank_.gate_threshold = params_.get(param::kEkfGate);
    bank_.gate_enabled = params_.get(param::kEkfGateEnable) > 0.5;
    estimator::predict_all(bank_, accel_ned_, c.dt);

    if (!measured.gps_valid) return;

    const Vec3 z{measured.gps_pos.x, measured.gps_pos.y, -measured.gps_alt};
    const Vec3 z_clean{clean.gps_pos.x, clean.gps_pos.y, -clean.gps_alt};
    for (int i = 0; i < 3; ++i) {
        const auto axis = static_cast<estimator::Axis>(i);
        const estimator::AxisFilter before = bank_.axes[static_cast<std::size_t>(i)];
        const auto r = estimator::update_axis(bank_, axis, z[i]);
        const double a = z[i] - z_clean[i];
        const bool spoofed = spoof_active && a != 0.0;
        if (spoofed) ++spoofed_updates_;
        if (r.status == estimator::UpdateStatus::gate_rejected) {
            ++gate_rejects_;
            if (spoofed) ++spoofed_rejected_;
            log_event(c.time, "gate_reject", {{"axis", i}, {"ratio", r.gate_ratio}, {"spoofed", spoofed}});
        } else if (spoofed && !spoof_delta_logged_[static_cast<std::size_t>(i)]) {
            // first corrupted update on this axis: spoofed result minus the
            // same update fed the clean measurement
            const auto shadow = estimator::update(before, z_clean[i], bank_.gate());
            const auto& xs = r.filter.x;
            const auto& xc = shadow.filter.x;
            const auto ka = estimator::injected_bias(r.filter, a).value();
            log_event(c.time, "spoof_update",
                      {{"axis", i},
                       {"offset", a},
                       {"gain", json::array({r.filter.K[0], r.filter.K[1]})},
                       {"delta", json::array({xs[0] - xc[0], xs[1] - xc[1]})},
                       {"k_a", json::array({ka[0], ka[1]})}});
            spoof_delta_logged_[static_cast<std::size_t>(i)] = true;
        }
    }
}

void Engine::position_task(const sched::TaskContext& c) {
    cascade_.feed_forward_enabled = bus_.mode != attack::FlightMode::pilot;
    if (bus_.mode == attack::FlightMode::pilot) {
        velocity_demand_ = {};
        vertical_.velocity_demand = 0.0;
        cascade_.pos_x = cascade_.pos_y = cascade_.pos_z = {};
        return;
    }
    const Vec3 est = bank_.position();
    auto& mission = bus_.mission;
    if (bus_.mode == attack::FlightMode::auto_mission && mission.started &&
        mission.current + 1 < mission.items.size() && norm(*mission.items[mission.current] - est) < 1.0) {
        ++mission.current;
        log_event(c.time, "mission_item_reached", {{"next", mission.current}});
    }
    const Vec3 target = position_target();
    const auto hp = control::horizontal_position_step(cascade_, target, {}, est, c.dt);
    velocity_demand_ = hp.velocity_demand;
    control::vertical_position_stage(cascade_, vertical_, {target.z, 0.0, 0.0}, {}, {}, est.z, c.dt);
}

void Engine::velocity_task(const sched::TaskContext& c) {
    Vec3 v_target = velocity_demand_;
    double vz = 0.0;
    if (bus_.mode == attack::FlightMode::pilot) {
        const Vec3 v = rc_velocity_ ? heading_to_ned(bus_.pilot.velocity, quat_to_euler(bank_.attitude).yaw)
                                    : plan_velocity_;
        v_target = {v.x, v.y, 0.0};
        vz = v.z;
    }
    const auto hv = control::horizontal_velocity_step(cascade_, v_target, {}, bank_.velocity(), {}, c.dt);
    accel_target_ = hv.accel_target;
    control::vertical_velocity_stage(cascade_, vertical_, {0.0, vz, 0.0}, {}, {}, bank_.velocity().z, c.dt);
}

void Engine::attitude_task(const sched::TaskContext& c) {
    double yaw_cmd = plan_yaw_;
    double yaw_rate_cmd = 0.0;
    if (bus_.mode == attack::FlightMode::pilot) {
        yaw_rate_cmd = rc_velocity_ ? bus_.pilot.yaw_rate : plan_yaw_rate_;
        yaw_cmd = wrap_pi(cascade_.prev_yaw_target + yaw_rate_cmd * c.dt);
    }
    const auto yaw = control::yaw_slew(cascade_, yaw_cmd, yaw_rate_cmd, c.dt);

    const double est_yaw = quat_to_euler(bank_.attitude).yaw;
    const Vec3 a_heading = control::ned_to_heading(accel_target_, est_yaw);
    const EulerAngles lean =
        control::accel_to_lean_angles(a_heading, scenario_.plant.gravity, cascade_.gains.lean_max);
    lean_target_ = {lean.roll, lean.pitch, yaw.yaw};
    q_target_ = quat_from_euler(lean_target_);

    const Vec3 e_ned = control::attitude_error(q_target_, bank_.attitude);
    const Vec3 e_body = rotate(inverse(bank_.attitude), e_ned);
    rate_target_ = control::attitude_p(cascade_, e_body, c.dt);

    // measured vertical acceleration is low-passed before the accel loop
    const double fc = params_.get(param::kAccZFilter);
    const double alpha = c.dt / (c.dt + 1.0 / (2.0 * kPi * fc));
    accz_filtered_ += alpha * (accel_ned_.z - accz_filtered_);
    control::vertical_accel_stage(cascade_, vertical_, {}, {}, {}, accz_filtered_, c.dt,
                                  throttle_saturated_ || mixer_saturated_);

    const auto thr = control::thrust_to_throttle(vertical_.thrust_in, cascade_.gains.hover_throttle,
                                                 tilt_angle(bank_.attitude));
    if (thr.tilt_limited && !tilt_limited_) {
        log_event(c.time, "tilt_limited");
    }
    tilt_limited_ = thr.tilt_limited;
    throttle_ = thr.throttle;
    throttle_saturated_ = thr.saturated;
}

void Engine::rate_task(const sched::TaskContext& c) {
    Vec3 tau = control::rate_pid(cascade_, rate_target_, frame_.gyro, c.dt, mixer_saturated_);
    for (const auto& b : torque_biases_) {
        tau = attack::apply_torque_bias(tau, attack::torque_bias_at(b.action, b.start, c.time));
    }
    torque_ = tau;
}

void Engine::mixer_task(const sched::TaskContext&) {
    if (!armed_) {
        motor_cmd_ = {};
        mixer_saturated_ = false;
        return;
    }
    const control::OutputLimits limits{params_.get(param::kMotOutMin), params_.get(param::kMotOutMax)};
    motor_cmd_ = control::mix(throttle_, torque_, cascade_.gains.geometry, limits);
    mixer_saturated_ = motor_cmd_.any_saturated();
    sat_since_log_ = sat_since_log_ || mixer_saturated_;
    motor_peak_ = std::max(motor_peak_, *std::max_element(motor_cmd_.u.begin(), motor_cmd_.u.end()));
}

void Engine::safety_task(const sched::TaskContext& c) {
    safety::SafetyInputs in;
    in.armed = armed_;
    in.crash_check_enabled = params_.get(param::kCrashCheckEnable) > 0.5;
    in.standby = scenario_.safety.standby;
    in.forced_flight = scenario_.safety.forced_flight;
    in.angle_mode = scenario_.safety.angle_mode;
    in.flipping = scenario_.safety.flipping;
    in.autorotation = scenario_.safety.autorotation;
    in.lean = tilt_angle(bank_.attitude);
    in.accel = norm(accel_ned_);
    in.thrust_error = safety::thrust_vector_error(q_target_, bank_.attitude);
    in.horizontal_speed = norm_xy(bank_.velocity());
    in.time = c.time;

    const bool was_confirmed = safety_.crash_confirmed;
    safety_ = safety::crash_check(in, std::move(safety_), c.dt);
    if (safety_.crash_confirmed && !was_confirmed) {
        armed_ = false;
        motor_cmd_ = {};
        log_event(c.time, "crash", {{"counter", safety_.crash_counter}, {"lean", in.lean}});
    }

    if (params_.get(param::kGcsFailsafeEnable) > 0.5) {
        const bool lost = safety::link_lost(bus_.last_heartbeat, c.time, params_.get(param::kGcsTimeout));
        if (lost && !link_lost_) {
            bus_.guided_target = bus_.home;
            bus_.mode = attack::FlightMode::guided;
            log_event(c.time, "link_loss", {{"last_heartbeat", *bus_.last_heartbeat}, {"target", json_vec(bus_.home)}});
        }
        link_lost_ = lost;
    }
}

void Engine::logging_task(const sched::TaskContext& c) { log_state(c.time); }

void Engine::tick_hook(const sched::TickInfo& info) {
    safety_.last_loop_time = info.last_loop_time;
    const bool watchdog = params_.get(param::kWatchdogEnable) > 0.5;
    const auto fs = safety::failsafe_check(std::move(safety_), info.time, motors_active(), watchdog);
    safety_ = fs.status;
    if (fs.action == safety::FailsafeAction::min_thrust_disarm) {
        armed_ = false;
        motor_cmd_ = {};
        motor_cmd_.u.fill(params_.get(param::kMotSpinMin));
        log_event(info.time, "failsafe",
                  {{"stage", safety::to_string(safety_.stage)}, {"gap", info.time - info.last_loop_time}});
    } else if (fs.action == safety::FailsafeAction::shutdown) {
        motor_cmd_ = {};
        log_event(info.time, "failsafe",
                  {{"stage", safety::to_string(safety_.stage)}, {"gap", info.time - info.last_loop_time}});
    }
    if (safety_.stage == safety::FailsafeStage::shutdown) {
        motor_cmd_ = {};
    }

    const auto r = plant::advance(truth_, motor_cmd_, scenario_.plant, sched_->dt());
    if (r.status != plant::StepStatus::ok) {
        log_event(info.time, "divergence", {{"reason", "non-finite plant state"}});
        sched_->request_stop();
        finish(EndReason::diverged);
        return;
    }
    if (r.clamped && !clamp_active_) {
        ++clamp_events_;
        log_event(info.time, "plant_clamp",
                  {{"motors", motor_cmd_.u}, {"peak", *std::max_element(motor_cmd_.u.begin(), motor_cmd_.u.end())}});
    }
    clamp_active_ = r.clamped;
    truth_ = r.state;
}

// -- telemetry -----------------------------------------------------------------

void Engine::log_state(double t) {
    json j{{"type", "state"},
           {"t", t},
           {"pos", json_vec(truth_.position)},
           {"vel", json_vec(truth_.velocity)},
           {"att", quat_json(truth_.attitude)},
           {"rates", json_vec(truth_.rates)},
           {"lean", tilt_angle(truth_.attitude)},
           {"est_pos", json_vec(bank_.position())},
           {"est_vel", json_vec(bank_.velocity())},
           {"est_att", quat_json(bank_.attitude)},
           {"target_pos", json_vec(position_target())},
           {"target_yaw", lean_target_.yaw},
           {"roll_target", lean_target_.roll},
           {"pitch_target", lean_target_.pitch},
           {"mode", attack::to_string(bus_.mode)},
           {"throttle", throttle_},
           {"motors", motor_cmd_.u},
           {"motor_peak", motor_peak_},
           {"sat", sat_since_log_},
           {"armed", armed_},
           {"crash_counter", safety_.crash_counter},
           {"crash", safety_.crash_confirmed},
           {"stage", safety::to_string(safety_.stage)},
           {"gate_rejects", gate_rejects_},
           {"spoofed_updates", spoofed_updates_},
           {"spoofed_rejected", spoofed_rejected_},
           {"clamp_events", clamp_events_}};
    log_.append(j);
    last_state_log_ = t;
    sat_since_log_ = false;
    motor_peak_ = *std::max_element(motor_cmd_.u.begin(), motor_cmd_.u.end());
}

void Engine::log_event(double t, const std::string& kind, json fields) {
    json j{{"type", "event"}, {"t", t}, {"kind", kind}};
    for (auto& [k, v] : fields.items()) j[k] = v;
    log_.append(j);
}

void Engine::finish(EndReason reason) {
    if (end_logged_) return;
    end_logged_ = true;
    end_ = reason;
    const double t = sched_->now();
    if (t != last_state_log_) log_state(t);
    json counts = json::object();
    for (const auto& task : sched_->tasks()) counts[task.name] = task.count;
    log_.append(json{{"type", "end"},
                     {"t", t},
                     {"reason", to_string(reason)},
                     {"ticks", sched_->ticks()},
                     {"task_counts", counts}});
}

}  // namespace quadsim::sim
