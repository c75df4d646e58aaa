#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace quadsim {

enum class ParamSource { pilot, gcs, attacker };

std::string_view to_string(ParamSource s);
std::optional<ParamSource> param_source_from_string(std::string_view s);

struct Param {
    std::string name;
    double value{0.0};
    double min{0.0};
    double max{0.0};
    bool mutable_in_flight{true};
    /// Set once a tamper has pushed the value outside the declared bounds.
    bool bounds_widened{false};
};

struct ParamChange {
    double time{0.0};
    std::string name;
    double old_value{0.0};
    double new_value{0.0};
    ParamSource source{ParamSource::gcs};
    bool bound_override{false};
};

enum class ParamSetStatus { ok, unknown_param, out_of_range };

std::string_view to_string(ParamSetStatus s);

class UnknownParamError : public std::out_of_range {
public:
    explicit UnknownParamError(const std::string& name)
        : std::out_of_range("unknown parameter: " + name), name_(name) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

/// Runtime parameter table with an append-only change log.
///
/// Every successful set is logged; failed sets leave both the table and the
/// log untouched. An attacker-sourced set with `bound_override` may push a
/// value outside [min, max]; the bounds are widened to include it and the
/// widening is recorded on the parameter and in the log entry.
class ParamRegistry {
public:
    ParamRegistry() = default;

    /// Registers a parameter. Throws std::invalid_argument on duplicates or
    /// if the default is outside its bounds.
    void declare(std::string name, double value, double min, double max, bool mutable_in_flight = true);

    ParamSetStatus set(std::string_view name, double value, ParamSource source, double time = 0.0,
                       bool bound_override = false);

    /// Throws UnknownParamError.
    double get(std::string_view name) const;
    const Param& at(std::string_view name) const;
    bool contains(std::string_view name) const;

    const std::map<std::string, Param, std::less<>>& params() const { return params_; }
    const std::vector<ParamChange>& log() const { return log_; }

    /// Incremented on every successful set; consumers cache derived
    /// configuration against it.
    std::uint64_t version() const { return version_; }

    /// Re-applies a change log onto this registry.
    void replay(const std::vector<ParamChange>& changes);

    friend bool operator==(const ParamRegistry& a, const ParamRegistry& b);

private:
    std::map<std::string, Param, std::less<>> params_;
    std::vector<ParamChange> log_;
    std::uint64_t version_{0};
};

bool operator==(const Param& a, const Param& b);

/// Free-function form of ParamRegistry::set.
ParamSetStatus param_set(ParamRegistry& reg, std::string_view name, double value, ParamSource source,
                         double time = 0.0, bool bound_override = false);

/// The full parameter table with defaults. Units are SI (m, s, rad).
ParamRegistry default_params();

namespace param {
// Scheduler
inline constexpr std::string_view kLoopRate = "SCHED_LOOP_RATE";
// Rate loop
inline constexpr std::string_view kRatRollP = "ATC_RAT_RLL_P";
inline constexpr std::string_view kRatRollI = "ATC_RAT_RLL_I";
inline constexpr std::string_view kRatRollD = "ATC_RAT_RLL_D";
inline constexpr std::string_view kRatRollFF = "ATC_RAT_RLL_FF";
inline constexpr std::string_view kRatRollImax = "ATC_RAT_RLL_IMAX";
inline constexpr std::string_view kRatPitchP = "ATC_RAT_PIT_P";
inline constexpr std::string_view kRatPitchI = "ATC_RAT_PIT_I";
inline constexpr std::string_view kRatPitchD = "ATC_RAT_PIT_D";
inline constexpr std::string_view kRatPitchFF = "ATC_RAT_PIT_FF";
inline constexpr std::string_view kRatPitchImax = "ATC_RAT_PIT_IMAX";
inline constexpr std::string_view kRatYawP = "ATC_RAT_YAW_P";
inline constexpr std::string_view kRatYawI = "ATC_RAT_YAW_I";
inline constexpr std::string_view kRatYawD = "ATC_RAT_YAW_D";
inline constexpr std::string_view kRatYawFF = "ATC_RAT_YAW_FF";
inline constexpr std::string_view kRatYawImax = "ATC_RAT_YAW_IMAX";
// Attitude loop
inline constexpr std::string_view kAngRollP = "ATC_ANG_RLL_P";
inline constexpr std::string_view kAngPitchP = "ATC_ANG_PIT_P";
inline constexpr std::string_view kAngYawP = "ATC_ANG_YAW_P";
inline constexpr std::string_view kSqrtOmegaMax = "ATC_SQRT_W_MAX";
inline constexpr std::string_view kSqrtEpsilon = "ATC_SQRT_EPS";
inline constexpr std::string_view kSqrtThreshold = "ATC_SQRT_THRESH";
inline constexpr std::string_view kRateRPMax = "RATE_RP_MAX";
inline constexpr std::string_view kRateYMax = "RATE_Y_MAX";
inline constexpr std::string_view kSlewYaw = "SLEW_YAW";
inline constexpr std::string_view kAccelShapeMax = "ATC_ACCEL_MAX";
inline constexpr std::string_view kAngleMax = "ANGLE_MAX";
// Horizontal position/velocity
inline constexpr std::string_view kPosXYP = "PSC_POSXY_P";
inline constexpr std::string_view kPosXYI = "PSC_POSXY_I";
inline constexpr std::string_view kPosXYD = "PSC_POSXY_D";
inline constexpr std::string_view kPosXYImax = "PSC_POSXY_IMAX";
inline constexpr std::string_view kPosXYVelMax = "PSC_POSXY_VMAX";
inline constexpr std::string_view kVelXYP = "PSC_VELXY_P";
inline constexpr std::string_view kVelXYI = "PSC_VELXY_I";
inline constexpr std::string_view kVelXYD = "PSC_VELXY_D";
inline constexpr std::string_view kVelXYFF = "PSC_VELXY_FF";
inline constexpr std::string_view kVelXYImax = "PSC_VELXY_IMAX";
inline constexpr std::string_view kAccXYMax = "PSC_ACC_XY_MAX";
// Vertical
inline constexpr std::string_view kPosZP = "PSC_POSZ_P";
inline constexpr std::string_view kPosZI = "PSC_POSZ_I";
inline constexpr std::string_view kPosZD = "PSC_POSZ_D";
inline constexpr std::string_view kPosZImax = "PSC_POSZ_IMAX";
inline constexpr std::string_view kPosZVelMax = "PSC_POSZ_VMAX";
inline constexpr std::string_view kVelZP = "PSC_VELZ_P";
inline constexpr std::string_view kVelZI = "PSC_VELZ_I";
inline constexpr std::string_view kVelZD = "PSC_VELZ_D";
inline constexpr std::string_view kVelZImax = "PSC_VELZ_IMAX";
inline constexpr std::string_view kVelZAccMax = "PSC_VELZ_AMAX";
inline constexpr std::string_view kAccZP = "PSC_ACCZ_P";
inline constexpr std::string_view kAccZI = "PSC_ACCZ_I";
inline constexpr std::string_view kAccZD = "PSC_ACCZ_D";
inline constexpr std::string_view kAccZImax = "PSC_ACCZ_IMAX";
inline constexpr std::string_view kAccZFilter = "PSC_ACCZ_FLTE";
// Motors
inline constexpr std::string_view kThrustHover = "MOT_THST_HOVER";
inline constexpr std::string_view kMotOutMin = "MOT_OUT_MIN";
inline constexpr std::string_view kMotOutMax = "MOT_OUT_MAX";
inline constexpr std::string_view kMotSpinMin = "MOT_SPIN_MIN";
// Estimator
inline constexpr std::string_view kEkfGate = "FS_EKF_THRESH";
inline constexpr std::string_view kEkfGateEnable = "EKF_GATE_ENABLE";
inline constexpr std::string_view kEkfAccNoise = "EKF_ACC_NOISE";
inline constexpr std::string_view kEkfPosNoise = "EKF_POS_NOISE";
inline constexpr std::string_view kEkfAltNoise = "EKF_ALT_NOISE";
inline constexpr std::string_view kAhrsCompGain = "AHRS_COMP_GAIN";
// Safety
inline constexpr std::string_view kCrashCheckEnable = "FS_CRASH_CHECK";
inline constexpr std::string_view kWatchdogEnable = "FS_WATCHDOG_ENABLE";
inline constexpr std::string_view kGcsFailsafeEnable = "FS_GCS_ENABLE";
inline constexpr std::string_view kGcsTimeout = "FS_GCS_TIMEOUT";
// Pilot stick mapping
inline constexpr std::string_view kPilotVelXYMax = "PILOT_VEL_XY_MAX";
inline constexpr std::string_view kPilotVelZMax = "PILOT_VEL_Z_MAX";
}  // namespace param

}  // namespace quadsim
