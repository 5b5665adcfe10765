#include "omega/simulator.hpp"

#include <json.hpp>

#include <algorithm>
#include <stdexcept>

namespace omega {

using nlohmann::json;

namespace {

json message_json(const Message& msg)
{
    json j;
    if (const auto* k = std::get_if<AliveKnown>(&msg)) {
        j["leader"] = k->leader;
        j["hb"] = k->hopbound;
        return j;
    }
    const auto& u = std::get<AliveUnknown>(msg);
    if (u.info) {
        j["leader"] = u.info->leader;
        j["hb"] = u.info->hopbound;
    } else {
        j["leader"] = nullptr;
        j["hb"] = nullptr;
    }
    json pending = json::array();
    for (const auto& e : u.pending) pending.push_back(json::array({e.label == Label::kNew ? "NEW" : "ACK", e.id}));
    j["pending"] = std::move(pending);
    if (u.sequence) j["seq"] = *u.sequence;
    return j;
}

}  // namespace

std::string message_to_json(const Message& msg) { return message_json(msg).dump(); }

bool exceeds_log_bound(const Message& msg, std::uint32_t n)
{
    if (const auto* k = std::get_if<AliveKnown>(&msg)) return encoded_size(*k, n) > known_size_bound(n);
    const auto& u = std::get<AliveUnknown>(msg);
    return encoded_size(u) > unknown_quiescent_size_bound(n, u.sequence);
}

void RunTrace::inject_delivery(const Message& msg, SimTime t)
{
    if (auto l = leader_field(msg); l && *l < last_delivered_with_leader.size())
        last_delivered_with_leader[*l] = std::max(last_delivered_with_leader[*l], t);
    ++deliveries;
}

Simulator::Simulator(const Digraph& graph, SimConfig config, std::vector<std::unique_ptr<ProcessLogic>> processes)
    : graph_(graph), config_(std::move(config)), processes_(std::move(processes))
{
    const std::uint32_t n = graph_.n();
    if (config_.T < 1) throw std::invalid_argument("T must be >= 1");
    if (processes_.size() != n + 1) throw std::invalid_argument("need one process per id (slot 0 unused)");
    if (!config_.clock_offsets.empty() && config_.clock_offsets.size() != n + 1)
        throw std::invalid_argument("clock_offsets must have n+1 entries");

    channels_.reserve(graph_.edge_count());
    for (const auto& e : graph_.edges())
        channels_.emplace_back(e.channel ? *e.channel : config_.default_channel,
                               channel_stream_seed(config_.seed, e.from, e.to));
    in_port_of_edge_.assign(graph_.edge_count(), 0);
    for (ProcessId p = 1; p <= n; ++p) {
        const auto& in = graph_.in_edges(p);
        for (std::size_t i = 0; i < in.size(); ++i) in_port_of_edge_[in[i]] = i;
    }

    crashed_.assign(n + 1, false);
    last_leader_.assign(n + 1, 0);
    tick_groups_.assign(static_cast<std::size_t>(config_.T), {});
    for (ProcessId p = 1; p <= n; ++p) {
        const SimTime phase = ((-offset(p)) % config_.T + config_.T) % config_.T;
        tick_groups_[static_cast<std::size_t>(phase)].push_back(p);
    }

    trace_.n = n;
    trace_.last_sent_with_leader.assign(n + 1, kNoTime);
    trace_.last_delivered_with_leader.assign(n + 1, kNoTime);
    trace_.edge_last_nonempty_pending.assign(graph_.edge_count(), kNoTime);
    trace_.edge_last_oversize.assign(graph_.edge_count(), kNoTime);
    trace_.edge_max_bytes_quiescent.assign(graph_.edge_count(), 0);
    for (ProcessId p = 1; p <= n; ++p) {
        last_leader_[p] = processes_[p]->leader();
        trace_.leader_changes.push_back({0, p, last_leader_[p]});
        if (config_.event_log)
            *config_.event_log << json{{"t", 0}, {"ev", "leader"}, {"p", p}, {"leader", last_leader_[p]}}.dump()
                               << '\n';
    }
}

void Simulator::schedule_crash(ProcessId p, SimTime t)
{
    if (p < 1 || p > graph_.n()) throw std::invalid_argument("crash of unknown process " + std::to_string(p));
    Event ev;
    ev.time = t;
    ev.kind = EventKind::kCrash;
    ev.process = p;
    queue_.schedule(ev);
}

SimTime Simulator::next_tick_after(SimTime t) const
{
    for (SimTime c = std::max<SimTime>(t + 1, 1); c <= t + config_.T; ++c)
        if (!tick_groups_[static_cast<std::size_t>(c % config_.T)].empty()) return c;
    return kNever;
}

void Simulator::run_until(SimTime horizon)
{
    while (true) {
        const SimTime tq = queue_.next_time();
        const SimTime tk = next_tick_after(ticks_done_through_);
        if (std::min(tq, tk) > horizon) break;
        if (tq <= tk) {
            dispatch(queue_.pop());
        } else {
            queue_.advance(tk);
            run_ticks(tk);
            ticks_done_through_ = tk;
        }
    }
    if (queue_.now() < horizon) queue_.advance(horizon);
    trace_.horizon = horizon;
}

void Simulator::note_leader(ProcessId p, SimTime t)
{
    const ProcessId l = processes_[p]->leader();
    if (config_.check_invariants) processes_[p]->check_invariants();
    if (l == last_leader_[p]) return;
    last_leader_[p] = l;
    trace_.leader_changes.push_back({t, p, l});
    if (config_.event_log) *config_.event_log << json{{"t", t}, {"ev", "leader"}, {"p", p}, {"leader", l}}.dump() << '\n';
}

void Simulator::run_ticks(SimTime t)
{
    for (ProcessId p : tick_groups_[static_cast<std::size_t>(t % config_.T)]) {
        if (crashed_[p]) continue;
        if (config_.event_log) *config_.event_log << json{{"t", t}, {"ev", "tick"}, {"p", p}}.dump() << '\n';
        out_buffer_.clear();
        processes_[p]->on_tick(local_time(p, t), out_buffer_);
        for (auto& o : out_buffer_) send(p, std::move(o), t);
        note_leader(p, t);
    }
}

void Simulator::send(ProcessId from, Outgoing&& out, SimTime t)
{
    const auto& ports = graph_.out_edges(from);
    if (out.port >= ports.size()) throw std::logic_error("send on unknown port");
    const std::size_t e = ports[out.port];
    const std::uint32_t n = graph_.n();

    ++trace_.sends;
    const std::size_t bytes = encoded_size(out.msg, n);
    trace_.max_message_bytes = std::max(trace_.max_message_bytes, bytes);
    if (auto l = leader_field(out.msg)) trace_.last_sent_with_leader.at(*l) = t;
    if (const auto* u = std::get_if<AliveUnknown>(&out.msg); u && !u->pending.empty()) {
        trace_.edge_last_nonempty_pending[e] = t;
        trace_.edge_max_bytes_quiescent[e] = 0;
    } else {
        trace_.edge_max_bytes_quiescent[e] = std::max(trace_.edge_max_bytes_quiescent[e], bytes);
    }
    if (exceeds_log_bound(out.msg, n)) trace_.edge_last_oversize[e] = t;

    const std::uint64_t id = next_message_id_++;
    const auto outcome = channels_[e].on_send(t);
    if (config_.event_log) {
        json j{{"t", t}, {"ev", "send"}, {"id", id}, {"from", from}, {"to", graph_.edge(e).to},
               {"msg", message_json(out.msg)}, {"bytes", bytes}};
        if (outcome.dropped()) {
            j["outcome"] = "drop";
        } else {
            j["outcome"] = "deliver";
            j["at"] = *outcome.deliver_at;
        }
        *config_.event_log << j.dump() << '\n';
    }
    if (outcome.dropped()) {
        ++trace_.drops;
        return;
    }
    std::size_t slot;
    if (!free_slots_.empty()) {
        slot = free_slots_.back();
        free_slots_.pop_back();
        slots_[slot] = InFlight{std::move(out.msg), t, id};
    } else {
        slot = slots_.size();
        slots_.push_back(InFlight{std::move(out.msg), t, id});
    }
    Event ev;
    ev.time = *outcome.deliver_at;
    ev.kind = EventKind::kDeliver;
    ev.process = graph_.edge(e).to;
    ev.edge = e;
    ev.slot = slot;
    queue_.schedule(ev);
}

void Simulator::schedule_arms(ProcessId p, const std::vector<TimerArm>& arms)
{
    for (const auto& a : arms) {
        Event ev;
        ev.time = a.deadline - offset(p);
        ev.kind = EventKind::kTimerExpiry;
        ev.process = p;
        ev.key = a.key;
        ev.generation = a.generation;
        queue_.schedule(ev);
    }
}

void Simulator::dispatch(const Event& ev)
{
    const SimTime t = ev.time;
    switch (ev.kind) {
    case EventKind::kCrash:
        if (crashed_[ev.process]) return;
        crashed_[ev.process] = true;
        trace_.crashes.emplace_back(ev.process, t);
        if (config_.event_log) *config_.event_log << json{{"t", t}, {"ev", "crash"}, {"p", ev.process}}.dump() << '\n';
        return;
    case EventKind::kDeliver: {
        InFlight flight = std::move(slots_[ev.slot]);
        free_slots_.push_back(ev.slot);
        const auto& edge = graph_.edge(ev.edge);
        const ProcessId to = edge.to;
        if (crashed_[to]) {
            ++trace_.discarded_at_crashed;
            return;
        }
        ++trace_.deliveries;
        if (auto l = leader_field(flight.msg)) trace_.last_delivered_with_leader.at(*l) = t;
        if (config_.event_log)
            *config_.event_log << json{{"t", t}, {"ev", "deliver"}, {"id", flight.id}, {"from", edge.from},
                                       {"to", to}, {"sent", flight.sent_at}}
                                      .dump()
                               << '\n';
        arm_buffer_.clear();
        processes_[to]->on_receive(local_time(to, t), in_port_of_edge_[ev.edge], edge.from, flight.msg, arm_buffer_);
        schedule_arms(to, arm_buffer_);
        note_leader(to, t);
        return;
    }
    case EventKind::kTimerExpiry: {
        if (crashed_[ev.process]) return;
        if (config_.event_log)
            *config_.event_log << json{{"t", t}, {"ev", "timer"}, {"p", ev.process}, {"src", ev.key.source},
                                       {"hb", ev.key.hopbound}, {"gen", ev.generation}}
                                      .dump()
                               << '\n';
        const TimerArm fired{ev.key, local_time(ev.process, t), ev.generation};
        processes_[ev.process]->on_timer(local_time(ev.process, t), fired);
        note_leader(ev.process, t);
        return;
    }
    case EventKind::kTick:
        throw std::logic_error("tick events are not queued");
    }
}

}  // namespace omega
