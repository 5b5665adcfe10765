#pragma once

#include "omega/timer.hpp"
#include "omega/types.hpp"

#include <cstdint>
#include <queue>
#include <stdexcept>
#include <vector>

namespace omega {

enum class EventKind : std::uint8_t { kCrash, kDeliver, kTimerExpiry, kTick };

struct Event {
    SimTime time = 0;
    std::uint64_t sequence = 0;  // assigned by the queue
    EventKind kind = EventKind::kTick;
    ProcessId process = 0;       // crash / timer / tick target, receiver for deliveries
    std::size_t edge = 0;        // kDeliver
    std::size_t slot = 0;        // kDeliver: in-flight message slot
    TimerKey key;                // kTimerExpiry
    std::uint64_t generation = 0;
};

// Min-queue over (time, sequence): ties resolve in insertion order.
class EventQueue {
public:
    // Throws std::logic_error when `ev.time` precedes the last popped event.
    void schedule(Event ev);

    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    const Event& top() const { return heap_.top(); }
    SimTime next_time() const { return heap_.empty() ? kNever : heap_.top().time; }
    Event pop();

    SimTime now() const { return now_; }
    // Moves the clock forward without popping (used when dispatching work
    // kept outside the queue).
    void advance(SimTime t);

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const
        {
            return a.time != b.time ? a.time > b.time : a.sequence > b.sequence;
        }
    };
    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    std::uint64_t next_sequence_ = 0;
    SimTime now_ = 0;
};

}  // namespace omega
