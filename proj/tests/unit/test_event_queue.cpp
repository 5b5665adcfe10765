#include "omega/event_queue.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace omega;

TEST_CASE("simultaneous events pop in insertion order")
{
    EventQueue q;
    q.schedule(Event{.time = 5, .kind = EventKind::kTick, .process = 1});
    q.schedule(Event{.time = 5, .kind = EventKind::kTick, .process = 2});
    CHECK(q.pop().process == 1);
    CHECK(q.pop().process == 2);
    CHECK(q.empty());
    CHECK(q.next_time() == kNever);
}

TEST_CASE("scheduling into the past is rejected")
{
    EventQueue q;
    q.schedule(Event{.time = 10});
    q.pop();
    CHECK(q.now() == 10);
    CHECK_THROWS_AS(q.schedule(Event{.time = 9}), std::logic_error);
    CHECK_NOTHROW(q.schedule(Event{.time = 10}));
}

TEST_CASE("a million random events pop in sorted order")
{
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<SimTime> pick(0, 5000);
    std::vector<std::pair<SimTime, std::uint32_t>> expected;
    EventQueue q;
    for (std::uint32_t i = 0; i < 1000000; ++i) {
        const SimTime t = pick(rng);
        expected.emplace_back(t, i);
        q.schedule(Event{.time = t, .process = i});
    }
    std::stable_sort(expected.begin(), expected.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    bool ok = true;
    for (const auto& [t, id] : expected) {
        const Event ev = q.pop();
        ok = ok && ev.time == t && ev.process == id;
    }
    CHECK(ok);
    CHECK(q.empty());
}
