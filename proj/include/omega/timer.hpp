#pragma once

#include "omega/types.hpp"

#include <cstdint>
#include <optional>

namespace omega {

// A one-shot countdown on a process's local clock. No deadline means the
// timer never expires. Each re-arm bumps the generation so that expiry events
// scheduled for an earlier arming can be told apart.
struct Timer {
    std::optional<SimTime> deadline;
    std::uint64_t generation = 0;

    bool expired(SimTime now) const { return deadline && *deadline <= now; }

    std::uint64_t arm(SimTime now, Duration timeout)
    {
        deadline = now + timeout;
        return ++generation;
    }

    static Timer never() { return Timer{}; }
};

// Identifies a timer inside one process: (monitored process, hopbound) for
// the known-membership algorithm, hopbound 0 for the single-indexed timers
// of the unknown-membership algorithm.
struct TimerKey {
    ProcessId source = 0;
    int hopbound = 0;

    friend auto operator<=>(const TimerKey&, const TimerKey&) = default;
};

// A request from a protocol state machine to be woken at `deadline` (local
// clock) unless the timer is re-armed first.
struct TimerArm {
    TimerKey key;
    SimTime deadline = 0;
    std::uint64_t generation = 0;
};

}  // namespace omega
