#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "streamforge/errors.hpp"
#include "streamforge/sim_time.hpp"

namespace streamforge {

/// One scheduled occurrence. Dequeue order is strictly (time, seq)
/// lexicographic; seq is a global insertion counter, so ties at equal time
/// resolve in insertion order.
struct SimEvent {
    SimTime time = 0;
    std::uint64_t seq = 0;
    std::string target;  // component id, for diagnostics
    std::function<void()> fn;
};

/// Deterministic single-threaded discrete-event loop. One Engine per run;
/// independent runs own independent engines.
class Engine {
  public:
    SimTime now() const { return clock_; }
    std::uint64_t processed() const { return processed_; }

    void schedule(SimTime t, std::string target, std::function<void()> fn) {
        if (t < clock_) {
            throw SchedulingInPastError("event for '" + target + "' at t=" + format_us(t) +
                                        "us behind clock t=" + format_us(clock_) + "us");
        }
        queue_.push(SimEvent{t, next_seq_++, std::move(target), std::move(fn)});
    }

    void schedule_in(SimTime delay, std::string target, std::function<void()> fn) {
        schedule(clock_ + delay, std::move(target), std::move(fn));
    }

    /// Processes every event with time <= duration, then advances the clock
    /// to exactly `duration` and returns it.
    SimTime run_until(SimTime duration) {
        while (!queue_.empty() && queue_.top().time <= duration) {
            SimEvent e = queue_.top();
            queue_.pop();
            clock_ = e.time;
            ++processed_;
            try {
                e.fn();
            } catch (const Error&) {
                throw;
            } catch (const std::exception& ex) {
                throw HandlerPanic("event target='" + e.target + "' t=" + format_us(e.time) +
                                   "us seq=" + std::to_string(e.seq) + ": " + ex.what());
            }
        }
        clock_ = duration;
        return clock_;
    }

    bool empty() const { return queue_.empty(); }

  private:
    struct Later {
        bool operator()(const SimEvent& a, const SimEvent& b) const {
            if (a.time != b.time) return a.time > b.time;
            return a.seq > b.seq;
        }
    };

    SimTime clock_ = 0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t processed_ = 0;
    std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue_;
};

}  // namespace streamforge
