#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace quadsim::sched {

class InvalidRate : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Fixed execution order within a tick.
enum class Priority : int { estimator = 0, position, velocity, attitude, rate, mixer, safety, logging };

std::string_view to_string(Priority p);

inline constexpr double kMinBaseRate = 50.0;
inline constexpr double kMaxBaseRate = 1000.0;

struct TaskContext {
    std::uint64_t tick{0};
    double time{0.0};
    /// Nominal period of the task (its own dt).
    double dt{0.0};
};

struct TaskSpec {
    std::string name;
    double rate_hz{0.0};
    Priority priority{Priority::logging};
    std::function<void(const TaskContext&)> callback;
};

struct Task {
    std::string name;
    double requested_rate{0.0};
    /// Rate actually achieved: base / period_ticks.
    double rate{0.0};
    std::uint64_t period_ticks{1};
    Priority priority{Priority::logging};
    std::function<void(const TaskContext&)> callback;
    double last_run{-1.0};
    bool has_run{false};
    std::uint64_t count{0};
};

struct StallWindow {
    double start{0.0};
    double duration{0.0};
    double end() const { return start + duration; }
};

struct JitterSample {
    std::string task;
    double time{0.0};
    /// actual interval minus nominal period
    double jitter{0.0};
};

struct ScheduleTrace {
    std::map<std::string, std::vector<double>> run_times;
    std::vector<JitterSample> jitter;
    std::vector<StallWindow> stalls;
    std::vector<std::string> warnings;

    std::uint64_t count(const std::string& task) const;
    friend bool operator==(const ScheduleTrace& a, const ScheduleTrace& b);
};

bool operator==(const StallWindow& a, const StallWindow& b);
bool operator==(const JitterSample& a, const JitterSample& b);

struct TickInfo {
    std::uint64_t tick{0};
    double time{0.0};
    bool stalled{false};
    /// Virtual time of the most recent tick whose tasks executed.
    double last_loop_time{0.0};
};

/// Virtual-time cooperative scheduler. Tick k happens at t = k / base; a task
/// with period n ticks is due when k is a multiple of n. Tasks run to
/// completion in priority order (insertion order breaks ties).
class Scheduler {
public:
    /// Throws InvalidRate if base is outside [50, 1000] Hz.
    explicit Scheduler(double base_rate_hz);

    /// Throws InvalidRate if the rate is outside [1, base]. A rate that does
    /// not divide the base evenly is rounded down and a warning recorded.
    void add_task(TaskSpec spec);

    /// CPU lockup: no task runs for ticks with start <= t < start + duration.
    void add_stall(StallWindow w);

    /// Runs after the tasks of every tick, stalled or not (watchdog and
    /// physics live here).
    void set_tick_hook(std::function<void(const TickInfo&)> hook) { hook_ = std::move(hook); }

    void tick();
    /// Runs the ticks that fall in [now, now + duration).
    void run_for(double duration);
    /// Stops run_for at the end of the current tick.
    void request_stop() { stop_ = true; }
    bool stop_requested() const { return stop_; }

    double base_rate() const { return base_; }
    double dt() const { return 1.0 / base_; }
    std::uint64_t ticks() const { return tick_; }
    double now() const { return time_of(tick_); }
    double time_of(std::uint64_t k) const { return static_cast<double>(k) / base_; }
    double last_loop_time() const { return last_loop_; }
    bool stalled(double t) const;

    const std::vector<Task>& tasks() const { return tasks_; }
    const ScheduleTrace& trace() const { return trace_; }

private:
    double base_;
    std::uint64_t tick_{0};
    double last_loop_{0.0};
    bool stop_{false};
    std::vector<Task> tasks_;
    std::function<void(const TickInfo&)> hook_;
    ScheduleTrace trace_;
};

/// Standalone run: builds a scheduler, executes for `duration` and returns
/// the trace.
ScheduleTrace run(std::vector<TaskSpec> tasks, double base_rate_hz, double duration,
                  const std::vector<StallWindow>& stalls = {});

}  // namespace quadsim::sched
