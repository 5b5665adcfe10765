#pragma once

#include "omega/messages.hpp"
#include "omega/simulator.hpp"
#include "omega/timer.hpp"
#include "omega/types.hpp"

#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

namespace omega {

using ChannelId = std::size_t;

// Per-process state of the unknown-membership election. A process starts
// knowing only itself and how many channels it has; names spread through
// per-channel pending sets of (NEW, id) / (ACK, id) pairs, and the leader is
// monitored with a single timer per known process.
class UnknownState {
public:
    UnknownState(ProcessId self, std::size_t channel_count, SimTime start_time = 0, bool staleness_guard = false);

    ProcessId self() const { return self_; }
    ProcessId leader() const { return leader_; }
    const std::set<ProcessId>& known() const { return known_; }
    std::size_t channel_count() const { return pending_.size(); }
    // Own entry is |known|; unknown or never-set entries read 0.
    int hopbound(ProcessId j) const;
    Duration timeout(ProcessId j) const;
    Timer timer(ProcessId j) const;
    const std::set<PendingEntry>& pending(ChannelId m) const { return pending_.at(m); }
    std::optional<ProcessId> neighbor_of(ChannelId m) const { return neighbor_of_.at(m); }
    bool staleness_guard() const { return staleness_guard_; }
    // Local time of the last timeout doubling (start time if none yet).
    SimTime last_timeout_increase() const { return last_timeout_increase_; }

    // Every T ticks: one ALIVE per channel, carrying the leader pair when
    // hopbound[leader] > 1 and the channel's pending set in any case.
    std::vector<std::pair<ChannelId, AliveUnknown>> on_tick();

    // Reception of `msg` from `from` through channel m: membership pass, then
    // leader pass. Returns the timers armed while handling it.
    std::vector<TimerArm> on_receive(SimTime now, ChannelId m, ProcessId from, const AliveUnknown& msg);

    // Expiry of timer[j]: demotes the leader to self when j is the current
    // leader (never for self) and the generation is the latest one.
    bool on_timer_expire(SimTime now, ProcessId j, std::optional<std::uint64_t> generation = {});

    void check_invariants() const;

private:
    struct Monitor {
        int hopbound = 0;
        Duration timeout = 1;
        Timer timer;
    };
    Monitor& monitor(ProcessId j, SimTime now, std::vector<TimerArm>& arms);

    ProcessId self_;
    ProcessId leader_;
    std::set<ProcessId> known_;
    std::map<ProcessId, Monitor> monitors_;
    std::vector<std::set<PendingEntry>> pending_;
    std::vector<std::optional<ProcessId>> neighbor_of_;
    bool staleness_guard_;
    SimTime last_timeout_increase_;
    std::uint64_t next_sequence_ = 1;
    std::vector<std::uint64_t> last_sequence_;  // per channel
};

// Adapter driving an UnknownState. Channel k is the link to the k-th
// neighbour in id order; the graph must be bidirectional so that out port k
// and in port k name the same neighbour.
class UnknownProcess final : public ProcessLogic {
public:
    UnknownProcess(ProcessId self, const Digraph& g, SimTime start_time = 0, bool staleness_guard = false);

    void on_tick(SimTime local_now, std::vector<Outgoing>& out) override;
    void on_receive(SimTime local_now, std::size_t in_port, ProcessId from, const Message& msg,
                    std::vector<TimerArm>& arms) override;
    void on_timer(SimTime local_now, const TimerArm& fired) override;
    ProcessId leader() const override { return state_.leader(); }
    void check_invariants() const override { state_.check_invariants(); }

    const UnknownState& state() const { return state_; }

private:
    UnknownState state_;
};

}  // namespace omega
