#include "omega/harness.hpp"

#include "omega/messages.hpp"
#include "omega/omega_known.hpp"
#include "omega/omega_unknown.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>

namespace omega {

const char* to_string(Algorithm a)
{
    return a == Algorithm::kKnown ? "known" : "unknown";
}

Algorithm algorithm_from_string(const std::string& s)
{
    if (s == "known") return Algorithm::kKnown;
    if (s == "unknown") return Algorithm::kUnknown;
    throw std::invalid_argument("unknown algorithm '" + s + "' (expected known or unknown)");
}

const char* to_string(TopologyKind k)
{
    switch (k) {
    case TopologyKind::kRing: return "ring";
    case TopologyKind::kRegular: return "regular";
    case TopologyKind::kRandomConnected: return "random";
    case TopologyKind::kComplete: return "complete";
    case TopologyKind::kEdgeList: return "edges";
    case TopologyKind::kExplicit: return "explicit";
    }
    return "?";
}

TopologyKind topology_kind_from_string(const std::string& s)
{
    if (s == "ring") return TopologyKind::kRing;
    if (s == "regular") return TopologyKind::kRegular;
    if (s == "random") return TopologyKind::kRandomConnected;
    if (s == "complete") return TopologyKind::kComplete;
    if (s == "edges") return TopologyKind::kEdgeList;
    throw std::invalid_argument("unknown topology '" + s + "' (expected ring, regular, random, complete or edges)");
}

Digraph build_topology(const Scenario& sc)
{
    const auto& t = sc.topology;
    const std::uint64_t gseed = t.graph_seed.value_or(sc.seed);
    switch (t.kind) {
    case TopologyKind::kRing:
        if (t.n == 1) return Digraph(1);
        return build_ring(t.n);
    case TopologyKind::kRegular: return build_regular(t.n, t.degree, gseed);
    case TopologyKind::kRandomConnected: return build_random_connected(t.n, t.extra_edges, gseed);
    case TopologyKind::kComplete: return build_complete(t.n);
    case TopologyKind::kEdgeList: return load_edge_list_file(t.edge_list_path, sc.channel);
    case TopologyKind::kExplicit:
        if (!t.graph) throw ScenarioError("explicit topology without a graph");
        return *t.graph;
    }
    throw ScenarioError("bad topology kind");
}

ProcessSet correct_processes(const Scenario& sc, std::uint32_t n)
{
    ProcessSet correct = all_processes(n);
    for (const auto& c : sc.crashes)
        if (c.time < sc.horizon) correct.erase(c.process);
    return correct;
}

namespace {

const ChannelConfig& channel_of(const Digraph& g, std::size_t e, const ChannelConfig& base)
{
    const auto& ov = g.edge(e).channel;
    return ov ? *ov : base;
}

}  // namespace

std::vector<std::string> check_assumptions(const Scenario& sc, const Digraph& g)
{
    std::vector<std::string> out;
    const std::uint32_t n = g.n();
    if (n == 0) {
        out.emplace_back("no processes");
        return out;
    }
    if (sc.T < 1) out.emplace_back("T must be >= 1");
    if (sc.horizon < 0) out.emplace_back("horizon must be >= 0");
    std::set<ProcessId> seen;
    for (const auto& c : sc.crashes) {
        if (c.process < 1 || c.process > n)
            out.push_back("crash of unknown process " + std::to_string(c.process));
        if (c.time < 0 || c.time >= sc.horizon)
            out.push_back("crash time " + std::to_string(c.time) + " of process " + std::to_string(c.process) +
                          " is not in [0, horizon)");
        if (!seen.insert(c.process).second)
            out.push_back("process " + std::to_string(c.process) + " crashes twice");
    }
    const ProcessSet correct = correct_processes(sc, n);
    if (correct.empty()) {
        out.emplace_back("no correct process left");
        return out;
    }
    const auto add = eventual_add_edges(g, sc.channel);
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        const auto& cfg = channel_of(g, e, sc.channel);
        if (cfg.add.K < 1 || cfg.add.D < 0)
            out.push_back("edge " + std::to_string(g.edge(e).from) + "->" + std::to_string(g.edge(e).to) +
                          " has invalid ADD parameters");
    }
    if (sc.algorithm == Algorithm::kKnown) {
        if (!validate_span_tree(g, add, correct))
            out.emplace_back("span-tree: no spanning tree rooted at min(correct) over eventually-ADD channels "
                             "among correct processes");
    } else {
        if (!g.is_bidirectional()) out.emplace_back("bidirectional: some channel has no reverse channel");
        for (std::size_t e = 0; e < g.edge_count(); ++e)
            if (!add.count(e)) {
                out.push_back("eventual-add: channel " + std::to_string(g.edge(e).from) + "->" +
                              std::to_string(g.edge(e).to) + " is never timely");
                break;
            }
        if (!strongly_connected(g, correct))
            out.emplace_back("connectivity: correct processes are not connected");
    }
    return out;
}

int effective_diameter(const Digraph& g, const ChannelConfig& base, const ProcessSet& correct)
{
    if (correct.empty()) return -1;
    const auto add = eventual_add_edges(g, base);
    Digraph h(g.n());
    for (std::size_t e : add) {
        const auto& edge = g.edge(e);
        if (correct.count(edge.from) && correct.count(edge.to)) h.add_edge(edge.from, edge.to);
    }
    if (strongly_connected(h, correct)) return diameter(h, correct);
    const auto dist = bfs_distances(h, *correct.begin(), correct);
    int ecc = 0;
    for (ProcessId p : correct) {
        if (dist[p] < 0) return -1;
        ecc = std::max(ecc, dist[p]);
    }
    return ecc;
}

std::optional<SimTime> measure_convergence(const RunTrace& trace, const ProcessSet& correct)
{
    if (correct.empty()) return std::nullopt;
    const ProcessId target = *correct.begin();
    // Changes are grouped by instant; only the state at the end of an instant
    // counts, so a flip undone within the same instant is invisible.
    std::vector<ProcessId> state(trace.n + 1, 0), end_state(trace.n + 1, 0);
    std::vector<SimTime> since(trace.n + 1, 0);
    const auto& ch = trace.leader_changes;
    for (std::size_t i = 0; i < ch.size();) {
        const SimTime t = ch[i].time;
        const std::size_t first = i;
        for (; i < ch.size() && ch[i].time == t; ++i) state.at(ch[i].process) = ch[i].leader;
        for (std::size_t k = first; k < i; ++k) {
            const ProcessId p = ch[k].process;
            if (state[p] == target && end_state[p] != target) since[p] = t;
            end_state[p] = state[p];
        }
    }
    SimTime t = 0;
    for (ProcessId p : correct) {
        if (state.at(p) != target) return std::nullopt;
        t = std::max(t, since[p]);
    }
    if (t > trace.horizon) return std::nullopt;
    return t;
}

bool within_time_bound(const RunResult& r, const Scenario& sc)
{
    if (!r.convergence_time) return false;
    const SimTime since = std::max<SimTime>(0, *r.convergence_time - sc.channel.add.stabilization);
    return since <= static_cast<SimTime>(r.diameter) * r.delta * kTimeBoundSlack;
}

std::vector<TimelineSample> sample_timeline(const RunTrace& trace, SimTime horizon, int samples)
{
    std::vector<TimelineSample> out;
    if (samples <= 0) return out;
    std::vector<ProcessId> cur(trace.n, 0);
    std::size_t i = 0;
    for (int s = 0; s < samples; ++s) {
        const SimTime at = samples == 1 ? horizon : horizon * s / (samples - 1);
        while (i < trace.leader_changes.size() && trace.leader_changes[i].time <= at) {
            cur.at(trace.leader_changes[i].process - 1) = trace.leader_changes[i].leader;
            ++i;
        }
        out.push_back({at, cur});
    }
    return out;
}

std::vector<Violation> check_oracles(const RunTrace& trace, const Scenario& sc, const Digraph& g)
{
    std::vector<Violation> out;
    const std::uint32_t n = trace.n;
    const SimTime window = trace.horizon - trace.horizon / 4;

    ProcessSet correct = all_processes(n);
    ProcessSet crashed;
    for (const auto& [p, t] : trace.crashes) {
        correct.erase(p);
        crashed.insert(p);
    }
    if (correct.empty()) return out;
    const ProcessId leader = *correct.begin();

    const auto conv = measure_convergence(trace, correct);
    if (!conv)
        out.push_back({"eventual-leadership", "correct processes do not agree on " + std::to_string(leader) +
                                                  " at the horizon"});
    else if (*conv > window)
        out.push_back({"eventual-leadership",
                       "agreement on " + std::to_string(leader) + " only from t=" + std::to_string(*conv)});

    for (ProcessId c : crashed) {
        if (trace.last_delivered_with_leader.at(c) >= window)
            out.push_back({"crashed-source-quiescence", "ALIVE naming crashed " + std::to_string(c) +
                                                            " delivered at t=" +
                                                            std::to_string(trace.last_delivered_with_leader[c])});
        else if (trace.last_sent_with_leader.at(c) >= window)
            out.push_back({"crashed-source-quiescence",
                           "ALIVE naming crashed " + std::to_string(c) + " sent at t=" +
                               std::to_string(trace.last_sent_with_leader[c])});
    }

    // Purity is judged from the moment of agreement; lateness of that moment
    // is eventual-leadership's concern.
    const SimTime pure_from = conv ? *conv : window;
    for (ProcessId id = 1; id <= n; ++id) {
        if (id == leader || crashed.count(id)) continue;
        if (trace.last_sent_with_leader.at(id) >= pure_from)
            out.push_back({"message-purity", "ALIVE naming " + std::to_string(id) + " sent at t=" +
                                                 std::to_string(trace.last_sent_with_leader[id])});
    }

    auto both_correct = [&](std::size_t e) {
        return correct.count(g.edge(e).from) && correct.count(g.edge(e).to);
    };

    if (sc.algorithm == Algorithm::kKnown) {
        if (trace.max_message_bytes > known_size_bound(n))
            out.push_back({"size-bound", "message of " + std::to_string(trace.max_message_bytes) +
                                             " bytes exceeds " + std::to_string(known_size_bound(n))});
    } else {
        for (std::size_t e = 0; e < g.edge_count(); ++e) {
            if (!both_correct(e)) continue;
            const auto& edge = g.edge(e);
            const std::string name = std::to_string(edge.from) + "->" + std::to_string(edge.to);
            if (trace.edge_last_nonempty_pending.at(e) >= window)
                out.push_back({"pending-quiescence", "nonempty pending set on " + name + " at t=" +
                                                         std::to_string(trace.edge_last_nonempty_pending[e])});
            else if (trace.edge_last_oversize.at(e) >= window)
                out.push_back({"size-bound", "oversized message on " + name + " at t=" +
                                                 std::to_string(trace.edge_last_oversize[e])});
        }
        if (trace.final_states.size() == n + 1) {
            const auto& ref = trace.final_states[leader].known;
            for (ProcessId p : correct) {
                const auto& snap = trace.final_states[p];
                for (ProcessId q : correct)
                    if (!snap.known.count(q)) {
                        out.push_back({"discovery", "process " + std::to_string(p) + " never learned " +
                                                        std::to_string(q)});
                        break;
                    }
                if (snap.known != ref)
                    out.push_back({"known-equality", "known set of " + std::to_string(p) + " differs from that of " +
                                                         std::to_string(leader)});
                const auto& in = g.in_edges(p);
                for (std::size_t m = 0; m < snap.pending_empty_per_port.size() && m < in.size(); ++m) {
                    const ProcessId q = g.edge(in[m]).from;
                    if (correct.count(q) && !snap.pending_empty_per_port[m])
                        out.push_back({"pending-quiescence", "process " + std::to_string(p) +
                                                                 " still has pending entries for " +
                                                                 std::to_string(q)});
                }
            }
        }
    }
    return out;
}

namespace {

// One simulation instance: the graph must outlive the simulator.
struct Instance {
    std::unique_ptr<Digraph> graph;
    std::unique_ptr<Simulator> sim;
};

Instance make_instance(const Scenario& sc, Digraph graph)
{
    Instance inst;
    inst.graph = std::make_unique<Digraph>(std::move(graph));
    const Digraph& g = *inst.graph;
    const std::uint32_t n = g.n();

    SimConfig cfg;
    cfg.T = sc.T;
    cfg.seed = sc.seed;
    cfg.default_channel = sc.channel;
    cfg.check_invariants = sc.check_invariants;
    cfg.event_log = sc.event_log;
    if (sc.random_clock_offsets && sc.T > 1) {
        std::mt19937_64 rng(splitmix64(sc.seed ^ 0x6f6666736574ULL));
        std::uniform_int_distribution<SimTime> pick(0, sc.T - 1);
        cfg.clock_offsets.assign(n + 1, 0);
        for (ProcessId p = 1; p <= n; ++p) cfg.clock_offsets[p] = pick(rng);
    }

    std::vector<std::unique_ptr<ProcessLogic>> procs(n + 1);
    for (ProcessId p = 1; p <= n; ++p) {
        const SimTime start = cfg.clock_offsets.empty() ? 0 : cfg.clock_offsets[p];
        if (sc.algorithm == Algorithm::kKnown)
            procs[p] = std::make_unique<KnownProcess>(
                p, g, start, sc.penalties ? HopboundPolicy::kPenalized : HopboundPolicy::kUnpenalized);
        else
            procs[p] = std::make_unique<UnknownProcess>(p, g, start, sc.staleness_guard);
    }
    inst.sim = std::make_unique<Simulator>(g, std::move(cfg), std::move(procs));
    return inst;
}

void snapshot(Instance& inst, const Scenario& sc)
{
    auto& sim = *inst.sim;
    auto& trace = sim.trace();
    const std::uint32_t n = inst.graph->n();
    trace.final_states.assign(n + 1, {});
    for (ProcessId p = 1; p <= n; ++p) {
        auto& s = trace.final_states[p];
        s.leader = sim.process(p).leader();
        s.crashed = sim.crashed(p);
        if (sc.algorithm == Algorithm::kKnown) {
            const auto& st = static_cast<const KnownProcess&>(sim.process(p)).state();
            s.last_timeout_increase = st.last_timeout_increase() - sim.offset(p);
        } else {
            const auto& st = static_cast<const UnknownProcess&>(sim.process(p)).state();
            s.last_timeout_increase = st.last_timeout_increase() - sim.offset(p);
            s.known = st.known();
            for (std::size_t m = 0; m < st.channel_count(); ++m) s.pending_empty_per_port.push_back(st.pending(m).empty());
        }
    }
}

std::size_t max_bits(const RunTrace& trace, const Scenario& sc, const Digraph& g, const ProcessSet& correct)
{
    if (sc.algorithm == Algorithm::kKnown) return trace.max_message_bytes * 8;
    std::size_t bytes = 0;
    for (std::size_t e = 0; e < g.edge_count(); ++e)
        if (correct.count(g.edge(e).from) && correct.count(g.edge(e).to))
            bytes = std::max(bytes, trace.edge_max_bytes_quiescent[e]);
    return bytes * 8;
}

std::string join(const std::vector<std::string>& v)
{
    std::string s;
    for (const auto& x : v) {
        if (!s.empty()) s += "; ";
        s += x;
    }
    return s;
}

RunResult prepare(const Scenario& sc, const Digraph& g)
{
    RunResult r;
    r.n = g.n();
    r.horizon = sc.horizon;
    r.delta = compute_delta(sc.channel.add.K, sc.channel.add.D, sc.T);
    r.assumption_violations = check_assumptions(sc, g);
    r.assumptions_hold = r.assumption_violations.empty();
    if (!r.assumptions_hold && sc.enforce_assumptions)
        throw ScenarioError("invalid scenario: " + join(r.assumption_violations));
    const ProcessSet correct = correct_processes(sc, g.n());
    r.expected_leader = correct.empty() ? 0 : *correct.begin();
    r.diameter = effective_diameter(g, sc.channel, correct);
    return r;
}

constexpr int kTimelineSamples = 17;

}  // namespace

RunResult run_scenario(const Scenario& sc, RunTrace& trace_out)
{
    Digraph g = build_topology(sc);
    RunResult r = prepare(sc, g);
    Instance inst = make_instance(sc, std::move(g));
    for (const auto& c : sc.crashes) inst.sim->schedule_crash(c.process, c.time);
    inst.sim->run_until(sc.horizon);
    snapshot(inst, sc);

    const RunTrace& trace = inst.sim->trace();
    const ProcessSet correct = correct_processes(sc, r.n);
    r.convergence_time = measure_convergence(trace, correct);
    for (ProcessId p : correct) r.timeouts_settled = std::max(r.timeouts_settled, trace.final_states[p].last_timeout_increase);
    r.total_messages = trace.sends;
    r.max_message_bits = max_bits(trace, sc, *inst.graph, correct);
    r.violations = check_oracles(trace, sc, *inst.graph);
    r.timeline = sample_timeline(trace, sc.horizon, kTimelineSamples);
    trace_out = trace;
    return r;
}

RunResult run_scenario(const Scenario& sc)
{
    RunTrace trace;
    return run_scenario(sc, trace);
}

RunResult measure_reelection(const Scenario& sc, RunTrace& trace_out)
{
    if (!sc.crashes.empty()) throw ScenarioError("re-election measurement needs a scenario without crashes");
    Scenario quiet = sc;
    quiet.event_log = nullptr;
    const RunResult baseline = run_scenario(quiet);
    if (!baseline.convergence_time)
        throw ScenarioError("no convergence before the horizon; cannot measure re-election");
    const SimTime tc = *baseline.convergence_time;
    const ProcessId victim = baseline.expected_leader;
    if (tc >= sc.horizon) throw ScenarioError("convergence at the horizon leaves no time for re-election");
    if (baseline.n < 2) throw ScenarioError("re-election needs at least two processes");

    Scenario crashed = sc;
    crashed.crashes = {{victim, tc}};
    Digraph g = build_topology(sc);
    RunResult r = prepare(crashed, g);
    Instance inst = make_instance(sc, std::move(g));
    inst.sim->run_until(tc);
    inst.sim->schedule_crash(victim, tc);
    inst.sim->run_until(sc.horizon);
    snapshot(inst, crashed);

    const RunTrace& trace = inst.sim->trace();
    const ProcessSet correct = correct_processes(crashed, r.n);
    Reelection re;
    re.crashed = victim;
    re.crash_time = tc;
    re.new_leader = correct.empty() ? 0 : *correct.begin();

    std::vector<ProcessId> leader_now(r.n + 1, 0);
    std::vector<SimTime> dropped_at(r.n + 1, kNoTime);
    for (const auto& c : trace.leader_changes) {
        if (leader_now[c.process] == victim && c.leader != victim) dropped_at[c.process] = c.time;
        if (c.leader == victim) dropped_at[c.process] = kNoTime;
        leader_now[c.process] = c.leader;
    }
    bool all_dropped = true;
    double sum = 0;
    for (ProcessId p : correct) {
        if (leader_now[p] == victim) {
            all_dropped = false;
            break;
        }
        sum += static_cast<double>(std::max<SimTime>(0, dropped_at[p] == kNoTime ? tc : dropped_at[p]) - tc);
    }
    if (all_dropped && !correct.empty())
        re.discard_time = static_cast<Duration>(std::llround(sum / static_cast<double>(correct.size())));
    const auto conv = measure_convergence(trace, correct);
    if (conv) re.reelection_time = std::max<SimTime>(*conv, tc) - tc;

    // Rows describe the network the election started on.
    r.diameter = baseline.diameter;
    r.convergence_time = baseline.convergence_time;
    r.timeouts_settled = baseline.timeouts_settled;
    r.reelection = re;
    r.total_messages = trace.sends;
    r.max_message_bits = max_bits(trace, sc, *inst.graph, correct);
    r.violations = check_oracles(trace, crashed, *inst.graph);
    r.timeline = sample_timeline(trace, sc.horizon, kTimelineSamples);
    trace_out = trace;
    return r;
}

RunResult measure_reelection(const Scenario& sc)
{
    RunTrace trace;
    return measure_reelection(sc, trace);
}

}  // namespace omega
