#include "quadsim/sim/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace quadsim::sim {

using nlohmann::json;

namespace {

Vec3 vec_of(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

struct Sample {
    double t;
    double track;
    double estimate;
    bool sat;
};

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

void check_expectations(RunReport& r, const json& expect) {
    auto fail = [&r](std::string s) { r.expectation_failures.push_back(std::move(s)); };
    if (expect.contains("crash") && expect["crash"].get<bool>() != r.crash_confirmed) {
        fail("crash expected " + std::string(expect["crash"].get<bool>() ? "true" : "false"));
    }
    if (expect.contains("failsafe_stage") &&
        expect["failsafe_stage"].get<std::string>() != safety::to_string(r.stage)) {
        fail("failsafe_stage expected " + expect["failsafe_stage"].get<std::string>() + ", got " +
             std::string(safety::to_string(r.stage)));
    }
    if (expect.contains("diverged") && expect["diverged"].get<bool>() != r.diverged) {
        fail("diverged expected " + std::string(expect["diverged"].get<bool>() ? "true" : "false"));
    }
    if (expect.contains("max_rms_error") && !(r.rms_tracking_error <= expect["max_rms_error"].get<double>())) {
        fail("rms tracking error " + fmt(r.rms_tracking_error) + " above " + fmt(expect["max_rms_error"].get<double>()));
    }
    if (expect.contains("max_final_error") &&
        !(r.final_position_error <= expect["max_final_error"].get<double>())) {
        fail("final position error " + fmt(r.final_position_error) + " above " +
             fmt(expect["max_final_error"].get<double>()));
    }
    if (expect.contains("max_lean") && !(r.max_lean <= expect["max_lean"].get<double>())) {
        fail("max lean " + fmt(r.max_lean) + " above " + fmt(expect["max_lean"].get<double>()));
    }
}

}  // namespace

RunReport report_from_lines(const std::vector<std::string>& lines) {
    if (lines.empty()) throw std::runtime_error("telemetry is empty");
    const json header = json::parse(lines.front());
    if (header.value("type", "") != "header" || header.value("format", "") != "quadsim-telemetry") {
        throw std::runtime_error("telemetry does not start with a header record");
    }
    const json& config = header.at("config");

    RunReport r;
    r.name = config.value("name", "");
    r.seed = header.value("seed", std::uint64_t{0});

    for (const auto& a : config.at("attacks")) {
        r.attacks.push_back({a.at("time").get<double>(), a.at("type").get<std::string>(), "", false});
    }

    std::vector<Sample> samples;
    Vec3 last_pos{}, last_target{};
    bool have_state = false;
    bool ended = false;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const json j = json::parse(lines[i]);
        const std::string type = j.at("type").get<std::string>();
        if (type == "state") {
            const Vec3 pos = vec_of(j.at("pos"));
            const Vec3 target = vec_of(j.at("target_pos"));
            const Vec3 est = vec_of(j.at("est_pos"));
            samples.push_back({j.at("t").get<double>(), norm(pos - target), norm(pos - est), j.at("sat").get<bool>()});
            last_pos = pos;
            last_target = target;
            have_state = true;
            r.max_lean = std::max(r.max_lean, j.at("lean").get<double>());
            r.max_motor_command = std::max(r.max_motor_command, j.at("motor_peak").get<double>());
            r.crash_confirmed = r.crash_confirmed || j.at("crash").get<bool>();
            const auto stage = safety::failsafe_stage_from_string(j.at("stage").get<std::string>());
            if (stage && *stage > r.stage) r.stage = *stage;
            r.gate_rejects = j.at("gate_rejects").get<std::uint64_t>();
            r.end_time = j.at("t").get<double>();
        } else if (type == "event") {
            const std::string kind = j.at("kind").get<std::string>();
            if (kind == "plant_clamp") {
                ++r.plant_clamp_events;
            } else if (kind == "divergence") {
                r.diverged = true;
            } else if (kind == "attack") {
                const auto idx = j.at("index").get<std::size_t>();
                if (idx < r.attacks.size()) {
                    r.attacks[idx].fired = true;
                    r.attacks[idx].detail = j.value("status", "");
                }
            }
        } else if (type == "end") {
            ended = true;
            r.end_time = j.at("t").get<double>();
            r.end_reason = j.at("reason").get<std::string>();
            if (r.end_reason == "diverged") r.diverged = true;
        }
    }
    if (!ended) r.end_reason = "incomplete";

    if (have_state) {
        r.final_position_error = norm(last_pos - last_target);
        double sum_t = 0.0, sum_e = 0.0;
        for (const auto& s : samples) {
            sum_t += s.track * s.track;
            sum_e += s.estimate * s.estimate;
        }
        const double n = static_cast<double>(samples.size());
        r.rms_tracking_error = std::sqrt(sum_t / n);
        r.rms_estimation_error = std::sqrt(sum_e / n);

        // settled from the sample after the last excursion outside the band
        std::size_t first_inside = samples.size();
        for (std::size_t i = samples.size(); i-- > 0;) {
            if (samples[i].track >= kSettleBand) break;
            first_inside = i;
        }
        double steady_from = samples.front().t + 0.5 * (samples.back().t - samples.front().t);
        if (first_inside < samples.size()) {
            r.settling_time = samples[first_inside].t;
            steady_from = *r.settling_time;
        }
        for (const auto& s : samples) {
            if (s.t >= steady_from && s.sat) r.steady_state_saturation = true;
        }
    }

    check_expectations(r, config.at("expect"));
    const bool divergence_expected = config.at("expect").value("diverged", false);
    r.passed = r.expectation_failures.empty() && (!r.diverged || divergence_expected);
    return r;
}

RunReport report_from_file(const std::filesystem::path& path) { return report_from_lines(read_lines(path)); }

json to_json(const RunReport& r) {
    json attacks = json::array();
    for (const auto& a : r.attacks) {
        attacks.push_back({{"time", a.time}, {"type", a.type}, {"detail", a.detail}, {"fired", a.fired}});
    }
    json j{{"name", r.name},
           {"seed", r.seed},
           {"final_position_error", r.final_position_error},
           {"max_lean", r.max_lean},
           {"crash_confirmed", r.crash_confirmed},
           {"failsafe_stage", safety::to_string(r.stage)},
           {"diverged", r.diverged},
           {"settling_time", r.settling_time ? json(*r.settling_time) : json(nullptr)},
           {"rms_tracking_error", r.rms_tracking_error},
           {"rms_estimation_error", r.rms_estimation_error},
           {"max_motor_command", r.max_motor_command},
           {"steady_state_saturation", r.steady_state_saturation},
           {"gate_rejects", r.gate_rejects},
           {"plant_clamp_events", r.plant_clamp_events},
           {"attacks", attacks},
           {"expectation_failures", r.expectation_failures},
           {"passed", r.passed},
           {"end_time", r.end_time},
           {"end_reason", r.end_reason}};
    return j;
}

int exit_code(const RunReport& r) {
    if (r.passed) return 0;
    return r.diverged ? 2 : 1;
}

RunResult run_scenario(const Scenario& s, const std::optional<std::filesystem::path>& telemetry_path) {
    Engine engine(s);
    engine.run();
    RunResult out;
    out.telemetry = engine.take_telemetry();
    if (telemetry_path) write_lines(*telemetry_path, out.telemetry);
    out.report = report_from_lines(out.telemetry);
    return out;
}

}  // namespace quadsim::sim
