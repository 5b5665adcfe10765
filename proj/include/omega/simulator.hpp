#pragma once

#include "omega/channel.hpp"
#include "omega/event_queue.hpp"
#include "omega/messages.hpp"
#include "omega/timer.hpp"
#include "omega/topology.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace omega {

inline constexpr SimTime kNoTime = -1;

struct Outgoing {
    std::size_t port = 0;  // index into the sender's out_edges
    Message msg;
};

// Protocol state machine as seen by the simulator. All times are on the
// process's local clock.
class ProcessLogic {
public:
    virtual ~ProcessLogic() = default;

    virtual void on_tick(SimTime local_now, std::vector<Outgoing>& out) = 0;
    // `in_port` indexes the receiver's in_edges; `from` is the sender.
    virtual void on_receive(SimTime local_now, std::size_t in_port, ProcessId from, const Message& msg,
                            std::vector<TimerArm>& arms) = 0;
    virtual void on_timer(SimTime local_now, const TimerArm& fired) = 0;
    virtual ProcessId leader() const = 0;
    // Throws std::logic_error when a protocol invariant is broken.
    virtual void check_invariants() const {}
};

struct LeaderChange {
    SimTime time = 0;
    ProcessId process = 0;
    ProcessId leader = 0;
};

// What the simulator records while running. Large runs keep only these
// summaries; the JSON-lines event log is opt-in.
struct RunTrace {
    std::uint32_t n = 0;
    std::vector<LeaderChange> leader_changes;  // starts with every process's initial leader at time 0
    std::vector<std::pair<ProcessId, SimTime>> crashes;

    std::uint64_t sends = 0;
    std::uint64_t deliveries = 0;
    std::uint64_t drops = 0;
    std::uint64_t discarded_at_crashed = 0;

    // Indexed by the id in the message's leader field.
    std::vector<SimTime> last_sent_with_leader;
    std::vector<SimTime> last_delivered_with_leader;

    std::size_t max_message_bytes = 0;
    // Indexed by edge.
    std::vector<SimTime> edge_last_nonempty_pending;     // unknown-membership messages only
    std::vector<SimTime> edge_last_oversize;             // larger than the O(log n) bound
    std::vector<std::size_t> edge_max_bytes_quiescent;   // max size since the last nonempty pending

    // Filled by the harness after the run.
    struct ProcessSnapshot {
        ProcessId leader = 0;
        bool crashed = false;
        SimTime last_timeout_increase = 0;           // global time
        std::set<ProcessId> known;                   // unknown membership only
        std::vector<bool> pending_empty_per_port;    // unknown membership only
    };
    std::vector<ProcessSnapshot> final_states;

    SimTime horizon = 0;

    // Test hook for exercising the oracles: record a delivery that never happened.
    void inject_delivery(const Message& msg, SimTime t);
};

struct SimConfig {
    Duration T = 1;
    std::uint64_t seed = 0;
    ChannelConfig default_channel;
    std::vector<SimTime> clock_offsets;  // index 1..n, local = global + offset; empty means all zero
    bool check_invariants = false;
    std::ostream* event_log = nullptr;   // JSON-lines, one event per line
};

// Deterministic discrete-event engine. At each instant queued events
// (crashes, deliveries, timer expiries) run first in (time, sequence) order,
// then the processes whose local clock reaches a multiple of T, by id.
class Simulator {
public:
    Simulator(const Digraph& graph, SimConfig config, std::vector<std::unique_ptr<ProcessLogic>> processes);

    void schedule_crash(ProcessId p, SimTime t);

    // Dispatches every event with time <= horizon.
    void run_until(SimTime horizon);

    SimTime now() const { return queue_.now(); }
    const RunTrace& trace() const { return trace_; }
    RunTrace& trace() { return trace_; }
    const Digraph& graph() const { return graph_; }
    const SimConfig& config() const { return config_; }

    ProcessLogic& process(ProcessId p) { return *processes_.at(p); }
    const ProcessLogic& process(ProcessId p) const { return *processes_.at(p); }
    bool crashed(ProcessId p) const { return crashed_.at(p); }
    SimTime local_time(ProcessId p, SimTime global) const { return global + offset(p); }
    SimTime offset(ProcessId p) const { return config_.clock_offsets.empty() ? 0 : config_.clock_offsets[p]; }

private:
    SimTime next_tick_after(SimTime t) const;
    void run_ticks(SimTime t);
    void dispatch(const Event& ev);
    void send(ProcessId from, Outgoing&& out, SimTime t);
    void schedule_arms(ProcessId p, const std::vector<TimerArm>& arms);
    void note_leader(ProcessId p, SimTime t);

    const Digraph& graph_;
    SimConfig config_;
    std::vector<std::unique_ptr<ProcessLogic>> processes_;  // index 0 unused
    std::vector<Channel> channels_;                         // by edge index
    std::vector<std::size_t> in_port_of_edge_;
    std::vector<bool> crashed_;
    std::vector<ProcessId> last_leader_;
    std::vector<std::vector<ProcessId>> tick_groups_;        // by phase in [0, T)
    EventQueue queue_;
    SimTime ticks_done_through_ = 0;

    struct InFlight {
        Message msg;
        SimTime sent_at = 0;
        std::uint64_t id = 0;
    };
    std::vector<InFlight> slots_;
    std::vector<std::size_t> free_slots_;
    std::uint64_t next_message_id_ = 0;

    std::vector<Outgoing> out_buffer_;
    std::vector<TimerArm> arm_buffer_;
    RunTrace trace_;
};

// Message exceeds the eventual O(log n) size bound of its algorithm.
bool exceeds_log_bound(const Message& msg, std::uint32_t n);

std::string message_to_json(const Message& msg);

}  // namespace omega
