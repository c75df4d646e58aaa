#include "quadsim/sched/scheduler.hpp"

#include <algorithm>
#include <cmath>

namespace quadsim::sched {

std::string_view to_string(Priority p) {
    switch (p) {
        case Priority::estimator: return "estimator";
        case Priority::position: return "position";
        case Priority::velocity: return "velocity";
        case Priority::attitude: return "attitude";
        case Priority::rate: return "rate";
        case Priority::mixer: return "mixer";
        case Priority::safety: return "safety";
        case Priority::logging: return "logging";
    }
    return "?";
}

std::uint64_t ScheduleTrace::count(const std::string& task) const {
    auto it = run_times.find(task);
    return it == run_times.end() ? 0 : it->second.size();
}

bool operator==(const StallWindow& a, const StallWindow& b) {
    return a.start == b.start && a.duration == b.duration;
}

bool operator==(const JitterSample& a, const JitterSample& b) {
    return a.task == b.task && a.time == b.time && a.jitter == b.jitter;
}

bool operator==(const ScheduleTrace& a, const ScheduleTrace& b) {
    return a.run_times == b.run_times && a.jitter == b.jitter && a.stalls == b.stalls && a.warnings == b.warnings;
}

Scheduler::Scheduler(double base_rate_hz) : base_(base_rate_hz) {
    if (!(base_rate_hz >= kMinBaseRate && base_rate_hz <= kMaxBaseRate)) {
        throw InvalidRate("base loop rate " + std::to_string(base_rate_hz) + " Hz outside [50, 1000]");
    }
}

void Scheduler::add_task(TaskSpec spec) {
    if (!(spec.rate_hz >= 1.0 && spec.rate_hz <= base_)) {
        throw InvalidRate("task '" + spec.name + "' rate " + std::to_string(spec.rate_hz) +
                          " Hz outside [1, base rate]");
    }
    Task t;
    t.name = spec.name;
    t.requested_rate = spec.rate_hz;
    const double ratio = base_ / spec.rate_hz;
    t.period_ticks = static_cast<std::uint64_t>(std::ceil(ratio - 1e-9));
    t.rate = base_ / static_cast<double>(t.period_ticks);
    if (std::abs(t.rate - spec.rate_hz) > 1e-9) {
        trace_.warnings.push_back("task '" + t.name + "' rate " + std::to_string(spec.rate_hz) +
                                  " Hz does not divide base; running at " + std::to_string(t.rate) + " Hz");
    }
    t.priority = spec.priority;
    t.callback = std::move(spec.callback);
    trace_.run_times[t.name];
    // stable: equal priorities keep insertion order
    auto pos = std::upper_bound(tasks_.begin(), tasks_.end(), t.priority,
                                [](Priority p, const Task& x) { return p < x.priority; });
    tasks_.insert(pos, std::move(t));
}

void Scheduler::add_stall(StallWindow w) {
    trace_.stalls.push_back(w);
}

bool Scheduler::stalled(double t) const {
    return std::any_of(trace_.stalls.begin(), trace_.stalls.end(),
                       [t](const StallWindow& w) { return t >= w.start && t < w.end(); });
}

void Scheduler::tick() {
    const double t = now();
    const bool stall = stalled(t);
    if (!stall) {
        for (Task& task : tasks_) {
            if (tick_ % task.period_ticks != 0) {
                continue;
            }
            const double period = static_cast<double>(task.period_ticks) / base_;
            if (task.has_run) {
                const double j = (t - task.last_run) - period;
                if (std::abs(j) > 1e-9) {
                    trace_.jitter.push_back({task.name, t, j});
                }
            }
            if (task.callback) {
                task.callback(TaskContext{tick_, t, period});
            }
            task.last_run = t;
            task.has_run = true;
            ++task.count;
            trace_.run_times[task.name].push_back(t);
        }
        last_loop_ = t;
    }
    if (hook_) {
        hook_(TickInfo{tick_, t, stall, last_loop_});
    }
    ++tick_;
}

void Scheduler::run_for(double duration) {
    const auto end = static_cast<std::uint64_t>(std::llround(std::floor((now() + duration) * base_ + 1e-9)));
    stop_ = false;
    while (tick_ < end && !stop_) {
        tick();
    }
}

ScheduleTrace run(std::vector<TaskSpec> tasks, double base_rate_hz, double duration,
                  const std::vector<StallWindow>& stalls) {
    Scheduler s(base_rate_hz);
    for (auto& t : tasks) {
        s.add_task(std::move(t));
    }
    for (const auto& w : stalls) {
        s.add_stall(w);
    }
    s.run_for(duration);
    return s.trace();
}

}  // namespace quadsim::sched
