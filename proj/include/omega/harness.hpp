#pragma once

#include "omega/channel.hpp"
#include "omega/simulator.hpp"
#include "omega/topology.hpp"
#include "omega/types.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace omega {

// Slack factor of the time-bound check: convergence - stabilization must not
// exceed diameter * Delta * kTimeBoundSlack on StrictAdd channels.
inline constexpr int kTimeBoundSlack = 3;

enum class Algorithm : std::uint8_t { kKnown, kUnknown };

const char* to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

enum class TopologyKind : std::uint8_t { kRing, kRegular, kRandomConnected, kComplete, kEdgeList, kExplicit };

const char* to_string(TopologyKind k);
TopologyKind topology_kind_from_string(const std::string& s);

struct TopologySpec {
    TopologyKind kind = TopologyKind::kRing;
    std::uint32_t n = 2;
    std::uint32_t degree = 3;                 // kRegular
    std::uint32_t extra_edges = 0;            // kRandomConnected
    std::string edge_list_path;               // kEdgeList
    std::optional<Digraph> graph;             // kExplicit
    std::optional<std::uint64_t> graph_seed;  // defaults to the scenario seed
};

struct CrashSpec {
    ProcessId process = 0;
    SimTime time = 0;

    friend bool operator==(const CrashSpec&, const CrashSpec&) = default;
};

struct Scenario {
    Algorithm algorithm = Algorithm::kKnown;
    TopologySpec topology;
    ChannelConfig channel;  // applies to every edge without an override
    Duration T = 1;
    std::vector<CrashSpec> crashes;
    SimTime horizon = 1000;
    std::uint64_t seed = 1;
    bool random_clock_offsets = true;  // per-process constant offsets in [0, T)
    bool staleness_guard = false;      // unknown membership only
    bool penalties = true;             // known membership: false selects HopboundPolicy::kUnpenalized
    bool enforce_assumptions = true;   // reject scenarios violating the variant's assumption
    bool check_invariants = false;     // assert protocol invariants after every event
    std::ostream* event_log = nullptr; // JSON-lines event log
};

class ScenarioError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Violation {
    std::string oracle;
    std::string detail;
};

struct Reelection {
    ProcessId crashed = 0;
    SimTime crash_time = 0;
    ProcessId new_leader = 0;
    std::optional<Duration> discard_time;     // mean over correct processes, since the crash
    std::optional<Duration> reelection_time;  // until all correct agree on new_leader, since the crash
};

struct TimelineSample {
    SimTime time = 0;
    std::vector<ProcessId> leaders;  // index p-1
};

struct RunResult {
    std::uint32_t n = 0;
    int diameter = 0;
    Duration delta = 0;
    SimTime horizon = 0;
    ProcessId expected_leader = 0;
    std::optional<SimTime> convergence_time;
    // Last global time a correct process doubled a timeout.
    SimTime timeouts_settled = 0;
    std::optional<Reelection> reelection;
    std::uint64_t total_messages = 0;
    std::size_t max_message_bits = 0;
    bool assumptions_hold = true;
    std::vector<std::string> assumption_violations;
    std::vector<Violation> violations;
    std::vector<TimelineSample> timeline;
};

Digraph build_topology(const Scenario& sc);

// Names every violated assumption: crash schedule sanity, Span-Tree for the
// known-membership variant, bidirectional eventually-ADD channels and a
// connected correct subgraph for the unknown-membership variant.
std::vector<std::string> check_assumptions(const Scenario& sc, const Digraph& g);

// Correct processes of the scenario (never crash before the horizon).
ProcessSet correct_processes(const Scenario& sc, std::uint32_t n);

// Diameter used for reporting: the diameter of the correct subgraph over
// eventually-ADD edges when strongly connected, otherwise the eccentricity
// of min(correct) over those edges. -1 when some correct process is unreachable.
int effective_diameter(const Digraph& g, const ChannelConfig& base, const ProcessSet& correct);

RunResult run_scenario(const Scenario& sc);

// Same as run_scenario, also handing back the trace.
RunResult run_scenario(const Scenario& sc, RunTrace& trace_out);

// Smallest t such that every correct process's leader equals min(correct)
// throughout [t, horizon]; nullopt if there is none. Leaders are read at the
// end of each instant, after all of its events.
std::optional<SimTime> measure_convergence(const RunTrace& trace, const ProcessSet& correct);

// Runs to first (stable) convergence, crashes the elected leader at that
// instant and measures how long the survivors take to drop it and to agree
// on the next smallest id. Throws ScenarioError if the first election does
// not happen before the horizon or the scenario has scheduled crashes.
RunResult measure_reelection(const Scenario& sc);
RunResult measure_reelection(const Scenario& sc, RunTrace& trace_out);

// Log-scan oracles over a finished run. The "eventually" of each property is
// checked over the final quarter of the run.
std::vector<Violation> check_oracles(const RunTrace& trace, const Scenario& sc, const Digraph& g);

// Leaders of every process at `samples` evenly spaced instants in [0, horizon].
// convergence - stabilization <= diameter * Delta * kTimeBoundSlack. Not
// guaranteed: a timeout still below Delta at stabilization only doubles once
// a long enough gap occurs, and that may happen arbitrarily late.
bool within_time_bound(const RunResult& r, const Scenario& sc);

std::vector<TimelineSample> sample_timeline(const RunTrace& trace, SimTime horizon, int samples);

}  // namespace omega
