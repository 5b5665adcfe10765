#pragma once

#include "omega/messages.hpp"
#include "omega/simulator.hpp"
#include "omega/timer.hpp"
#include "omega/types.hpp"

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace omega {

// One entry of the bag of hopbound values whose timers are still running.
struct HopboundCandidate {
    int hopbound = 0;
    int penalty = -1;
};

// Among the least penalized candidates (a penalty of -1, never expired,
// ranks best) returns the largest hopbound. Empty input gives nullopt: all
// timers for the leader have expired.
std::optional<int> select_hopbound(std::span<const HopboundCandidate> not_expired);

// kPenalized follows the rule above. kUnpenalized ignores penalties and takes
// the largest running hopbound; it is only sound when every channel is
// eventually timely (no channel needs to be ruled out).
enum class HopboundPolicy { kPenalized, kUnpenalized };

std::optional<int> select_hopbound(std::span<const HopboundCandidate> not_expired, HopboundPolicy policy);

// Per-process state of the known-membership election. Processes know n; the
// timer/timeout/penalty matrices are indexed by (source, hopbound) and stored
// sparsely: an entry never touched still holds its initial value (timeout 1,
// timer armed at start-up for 1 tick, penalty -1).
class KnownState {
public:
    KnownState(ProcessId self, std::uint32_t n, std::vector<ProcessId> out_neighbors,
               std::vector<ProcessId> in_neighbors, SimTime start_time = 0,
               HopboundPolicy policy = HopboundPolicy::kPenalized);

    ProcessId self() const { return self_; }
    std::uint32_t n() const { return n_; }
    HopboundPolicy policy() const { return policy_; }
    // Local time of the last timeout doubling (start time if none yet).
    SimTime last_timeout_increase() const { return last_timeout_increase_; }
    ProcessId leader() const { return leader_; }
    int hopbound(ProcessId j) const { return hopbound_.at(j); }
    Duration timeout(ProcessId j, int x) const;
    Timer timer(ProcessId j, int x) const;
    int penalty(ProcessId j, int x) const;
    const std::vector<ProcessId>& out_neighbors() const { return out_neighbors_; }
    const std::vector<ProcessId>& in_neighbors() const { return in_neighbors_; }

    // Every T ticks: ALIVE(leader, hopbound[leader]-1) to each out-neighbour
    // while hopbound[leader] > 1.
    std::vector<std::pair<ProcessId, AliveKnown>> on_tick() const;

    // Reception of ALIVE(l, hb). Returns the timer armed for (l, hb), if any.
    std::optional<TimerArm> on_receive(SimTime now, ProcessId l, int hb);

    // Expiry of timer (j, hb). Acts only when j is the current leader, j is
    // not this process, and (when given) the generation matches the latest
    // arming. Returns whether the expiry was handled.
    bool on_timer_expire(SimTime now, ProcessId j, int hb, std::optional<std::uint64_t> generation = {});

    // Hopbound values x whose timer[leader][x] is still running.
    std::vector<HopboundCandidate> not_expired(SimTime now) const;

    void check_invariants() const;

private:
    struct Slot {
        int hopbound = 0;
        Duration timeout = 1;
        Timer timer;
        int penalty = -1;
    };
    Slot initial_slot(int x) const;
    Slot* find(ProcessId j, int x);
    const Slot* find(ProcessId j, int x) const;
    Slot& slot(ProcessId j, int x);
    void reselect_hopbound(SimTime now);

    ProcessId self_;
    std::uint32_t n_;
    ProcessId leader_;
    std::vector<int> hopbound_;
    std::vector<ProcessId> out_neighbors_;
    std::vector<ProcessId> in_neighbors_;
    SimTime start_time_;
    HopboundPolicy policy_;
    SimTime last_timeout_increase_;
    std::map<ProcessId, std::vector<Slot>> rows_;  // slots sorted by hopbound
};

// Adapter driving a KnownState from the simulator. Port k is the k-th
// out-neighbour in id order.
class KnownProcess final : public ProcessLogic {
public:
    KnownProcess(ProcessId self, const Digraph& g, SimTime start_time = 0,
                 HopboundPolicy policy = HopboundPolicy::kPenalized);

    void on_tick(SimTime local_now, std::vector<Outgoing>& out) override;
    void on_receive(SimTime local_now, std::size_t in_port, ProcessId from, const Message& msg,
                    std::vector<TimerArm>& arms) override;
    void on_timer(SimTime local_now, const TimerArm& fired) override;
    ProcessId leader() const override { return state_.leader(); }
    void check_invariants() const override { state_.check_invariants(); }

    const KnownState& state() const { return state_; }

private:
    KnownState state_;
    std::map<ProcessId, std::size_t> port_of_;
};

}  // namespace omega
