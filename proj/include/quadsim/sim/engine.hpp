#pragma once

#include "quadsim/attack/tamper.hpp"
#include "quadsim/control/cascade.hpp"
#include "quadsim/estimator/estimator_bank.hpp"
#include "quadsim/plant/sensors.hpp"
#include "quadsim/safety/safety.hpp"
#include "quadsim/sched/scheduler.hpp"
#include "quadsim/sim/scenario.hpp"
#include "quadsim/sim/telemetry.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace quadsim::sim {

struct EngineOptions {
    /// Keep every clean and spoofed sensor frame in memory.
    bool record_sensors{false};
};

struct SensorRecord {
    plant::SensorFrame clean;
    plant::SensorFrame measured;
};

enum class EndReason { running, duration, shutdown, diverged };

std::string_view to_string(EndReason r);

/// One closed-loop simulation: plant, sensors, estimator, cascade, mixer,
/// attacks and safety, all driven by the virtual-time scheduler.
class Engine {
public:
    /// Throws ValidationError for an invalid scenario.
    explicit Engine(Scenario scenario, EngineOptions options = {});
    ~Engine();
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    /// Advances one base tick; false once the run has ended.
    bool step();
    /// Steps until the end; closes the telemetry log.
    void run();
    /// Steps until virtual time reaches t (or the run ends).
    void run_until(double t);

    bool finished() const { return end_ != EndReason::running; }
    EndReason end_reason() const { return end_; }
    double time() const;
    double base_rate() const;

    const Scenario& scenario() const { return scenario_; }
    const plant::TrueState& truth() const { return truth_; }
    const estimator::EstimatorBank& estimate() const { return bank_; }
    const control::CascadeState& controller() const { return cascade_; }
    const ParamRegistry& params() const { return params_; }
    ParamRegistry& params() { return params_; }
    const safety::SafetyStatus& safety_status() const { return safety_; }
    const attack::BusState& bus() const { return bus_; }
    const sched::Scheduler& scheduler() const;
    bool armed() const { return armed_; }
    const control::MotorCommand& motor_command() const { return motor_cmd_; }
    /// Attitude target from the most recent attitude-loop run.
    const Quaternion& attitude_target() const { return q_target_; }
    const EulerAngles& lean_target() const { return lean_target_; }
    Vec3 position_target() const;
    const std::vector<SensorRecord>& sensor_log() const { return sensor_log_; }

    const std::vector<std::string>& telemetry() const { return log_.lines(); }
    std::vector<std::string> take_telemetry() { return log_.take(); }

private:
    struct TorqueBiasState {
        attack::TorqueBiasAction action;
        double start{0.0};
    };

    void build_scheduler();
    void fire_due_attacks(double t);
    void fire(const attack::AttackEvent& e, std::size_t index, double t);
    void activate_waypoints(double t);
    void refresh_gains();

    void estimator_task(const sched::TaskContext& c);
    void position_task(const sched::TaskContext& c);
    void velocity_task(const sched::TaskContext& c);
    void attitude_task(const sched::TaskContext& c);
    void rate_task(const sched::TaskContext& c);
    void mixer_task(const sched::TaskContext& c);
    void safety_task(const sched::TaskContext& c);
    void logging_task(const sched::TaskContext& c);
    void tick_hook(const sched::TickInfo& info);

    void log_state(double t);
    void log_event(double t, const std::string& kind, nlohmann::json fields = nlohmann::json::object());
    void finish(EndReason reason);
    bool motors_active() const;

    Scenario scenario_;
    EngineOptions options_;
    ParamRegistry params_;
    std::uint64_t gains_version_{~std::uint64_t{0}};
    std::unique_ptr<sched::Scheduler> sched_;
    std::uint64_t total_ticks_{0};
    EndReason end_{EndReason::running};
    bool end_logged_{false};

    plant::TrueState truth_{};
    plant::SensorModel sensors_;
    plant::SensorFrame frame_{};
    attack::SensorHistory history_;
    std::vector<attack::SpoofProfile> spoofs_;
    std::vector<TorqueBiasState> torque_biases_;
    std::vector<SensorRecord> sensor_log_;
    std::uint64_t estimator_runs_{0};
    std::uint64_t gps_every_{1};

    estimator::EstimatorBank bank_{};
    Vec3 accel_ned_{};
    double accz_filtered_{0.0};
    std::array<bool, 3> spoof_delta_logged_{};
    bool underrun_logged_{false};
    std::uint64_t gate_rejects_{0};
    std::uint64_t spoofed_updates_{0};
    std::uint64_t spoofed_rejected_{0};

    control::CascadeState cascade_{};
    Vec3 velocity_demand_{};
    control::VerticalOutput vertical_{};
    Vec3 accel_target_{};
    Quaternion q_target_{};
    EulerAngles lean_target_{};
    Vec3 rate_target_{};
    Vec3 torque_{};
    double throttle_{0.0};
    bool throttle_saturated_{false};
    bool tilt_limited_{false};
    control::MotorCommand motor_cmd_{};
    bool mixer_saturated_{false};
    bool sat_since_log_{false};
    double motor_peak_{0.0};
    bool clamp_active_{false};
    std::uint64_t clamp_events_{0};

    attack::BusState bus_{};
    bool rc_velocity_{false};
    Vec3 plan_velocity_{};
    double plan_yaw_{0.0};
    double plan_yaw_rate_{0.0};
    std::size_t next_waypoint_{0};
    /// Scenario attack indices in firing order.
    std::vector<std::size_t> attack_order_;
    std::size_t next_attack_{0};

    bool armed_{true};
    safety::SafetyStatus safety_{};
    bool link_lost_{false};

    Telemetry log_;
    double last_state_log_{-1.0};
};

}  // namespace quadsim::sim
