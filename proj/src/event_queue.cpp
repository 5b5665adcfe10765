#include "omega/event_queue.hpp"

#include <string>

namespace omega {

void EventQueue::schedule(Event ev)
{
    if (ev.time < now_)
        throw std::logic_error("cannot schedule at " + std::to_string(ev.time) + ", clock is at " +
                               std::to_string(now_));
    ev.sequence = next_sequence_++;
    heap_.push(ev);
}

Event EventQueue::pop()
{
    Event ev = heap_.top();
    heap_.pop();
    now_ = ev.time;
    return ev;
}

void EventQueue::advance(SimTime t)
{
    if (t < now_) throw std::logic_error("clock cannot move backwards");
    now_ = t;
}

}  // namespace omega
