#include "omega/cli.hpp"

#include "omega/harness.hpp"
#include "omega/scenario_io.hpp"
#include "omega/sweep.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>

namespace omega {

namespace {

struct Flags {
    std::string scenario_path;
    std::string config_path;
    std::string out_path;
    std::string log_path;

    std::string topology;
    std::uint32_t n = 0;
    std::uint32_t degree = 0;
    std::uint32_t extra_edges = 0;
    std::string edges;
    int K = 0;
    Duration D = 0;
    Duration T = 0;
    double drop_rate = 0;
    std::string mode;
    SimTime stabilization = 0;
    double pre_drop = 0;
    std::string algorithm;
    std::uint64_t seed = 0;
    SimTime horizon = 0;
    std::vector<std::string> crashes;
    bool staleness_guard = false;
    bool no_penalties = false;
    bool no_clock_offsets = false;
    bool allow_invalid = false;
    bool check_invariants = false;

    bool reelection = false;
    std::vector<std::uint32_t> sizes;
    std::vector<double> drop_rates;
    std::vector<Duration> T_values;
    int repetitions = 0;
    std::uint64_t first_seed = 0;
};

struct Options {
    CLI::Option* topology;
    CLI::Option* n;
    CLI::Option* degree;
    CLI::Option* extra_edges;
    CLI::Option* edges;
    CLI::Option* K;
    CLI::Option* D;
    CLI::Option* T;
    CLI::Option* drop_rate;
    CLI::Option* mode;
    CLI::Option* stabilization;
    CLI::Option* pre_drop;
    CLI::Option* algorithm;
    CLI::Option* seed;
    CLI::Option* horizon;
    CLI::Option* crashes;
    CLI::Option* staleness_guard;
    CLI::Option* no_penalties;
    CLI::Option* no_clock_offsets;
    CLI::Option* allow_invalid;
    CLI::Option* check_invariants;
};

Options add_scenario_flags(CLI::App& app, Flags& f)
{
    Options o{};
    o.topology = app.add_option("--topology", f.topology, "ring | regular | random | complete | edges");
    o.n = app.add_option("--n", f.n, "number of processes");
    o.degree = app.add_option("--degree", f.degree, "degree of a regular topology");
    o.extra_edges = app.add_option("--extra-edges", f.extra_edges, "chords added to a random spanning tree");
    o.edges = app.add_option("--edges", f.edges, "edge-list file");
    o.K = app.add_option("--K", f.K, "ADD window length");
    o.D = app.add_option("--D", f.D, "ADD delay bound (ticks)");
    o.T = app.add_option("--T", f.T, "heartbeat period (ticks)");
    o.drop_rate = app.add_option("--drop-rate", f.drop_rate, "drop probability");
    o.mode = app.add_option("--mode", f.mode, "iid | strict | scripted");
    o.stabilization = app.add_option("--stabilization", f.stabilization, "global stabilization time");
    o.pre_drop = app.add_option("--pre-drop", f.pre_drop, "drop probability before stabilization");
    o.algorithm = app.add_option("--algorithm", f.algorithm, "known | unknown");
    o.seed = app.add_option("--seed", f.seed, "master seed");
    o.horizon = app.add_option("--horizon", f.horizon, "simulated time limit");
    o.crashes = app.add_option("--crash", f.crashes, "crash schedule entry pid@time (repeatable)");
    o.staleness_guard = app.add_flag("--staleness-guard", f.staleness_guard, "sequence-number guard (unknown)");
    o.no_penalties = app.add_flag("--no-penalties", f.no_penalties,
                                  "known: ignore penalties when picking a hopbound (all channels eventually timely)");
    o.no_clock_offsets = app.add_flag("--no-clock-offsets", f.no_clock_offsets, "all local clocks equal");
    o.allow_invalid = app.add_flag("--allow-invalid", f.allow_invalid, "run even if assumptions fail");
    o.check_invariants = app.add_flag("--check-invariants", f.check_invariants, "assert invariants per event");
    return o;
}

CrashSpec parse_crash(const std::string& s)
{
    const auto at = s.find('@');
    if (at == std::string::npos) throw CLI::ValidationError("--crash", "expected pid@time, got '" + s + "'");
    try {
        std::size_t a = 0;
        std::size_t b = 0;
        const auto pid = std::stoul(s.substr(0, at), &a);
        const auto t = std::stoll(s.substr(at + 1), &b);
        if (a != at || b != s.size() - at - 1) throw std::invalid_argument("trailing");
        return {static_cast<ProcessId>(pid), t};
    } catch (const std::exception&) {
        throw CLI::ValidationError("--crash", "expected pid@time, got '" + s + "'");
    }
}

Scenario apply_flags(Scenario sc, const Flags& f, const Options& o)
{
    if (*o.topology) sc.topology.kind = topology_kind_from_string(f.topology);
    if (*o.n) sc.topology.n = f.n;
    if (*o.degree) sc.topology.degree = f.degree;
    if (*o.extra_edges) sc.topology.extra_edges = f.extra_edges;
    if (*o.edges) {
        sc.topology.edge_list_path = f.edges;
        if (!*o.topology) sc.topology.kind = TopologyKind::kEdgeList;
    }
    if (*o.K) sc.channel.add.K = f.K;
    if (*o.D) sc.channel.add.D = f.D;
    if (*o.T) sc.T = f.T;
    if (*o.drop_rate) sc.channel.drop_probability = f.drop_rate;
    if (*o.mode) sc.channel.mode = loss_mode_from_string(f.mode);
    if (*o.stabilization) sc.channel.add.stabilization = f.stabilization;
    if (*o.pre_drop) sc.channel.pre_stabilization_drop = f.pre_drop;
    if (*o.algorithm) sc.algorithm = algorithm_from_string(f.algorithm);
    if (*o.seed) sc.seed = f.seed;
    if (*o.horizon) sc.horizon = f.horizon;
    if (*o.crashes) {
        sc.crashes.clear();
        for (const auto& c : f.crashes) sc.crashes.push_back(parse_crash(c));
    }
    if (*o.staleness_guard) sc.staleness_guard = true;
    if (*o.no_penalties) sc.penalties = false;
    if (*o.no_clock_offsets) sc.random_clock_offsets = false;
    if (*o.allow_invalid) sc.enforce_assumptions = false;
    if (*o.check_invariants) sc.check_invariants = true;
    if (sc.channel.drop_probability < 0 || sc.channel.drop_probability > 1)
        throw std::invalid_argument("--drop-rate must be in [0, 1]");
    if (sc.channel.pre_stabilization_drop < 0 || sc.channel.pre_stabilization_drop > 1)
        throw std::invalid_argument("--pre-drop must be in [0, 1]");
    return sc;
}

std::string dir_of(const std::string& path)
{
    return std::filesystem::path(path).parent_path().string();
}

// Output stream: --out file when given, else `out`.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback)
    {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw std::invalid_argument("cannot write " + path);
            stream_ = file_.get();
        }
    }
    std::ostream& get() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

int do_run(const Scenario& sc_in, const Flags& f, std::ostream& out, std::ostream& err)
{
    Scenario sc = sc_in;
    std::unique_ptr<std::ofstream> log;
    if (!f.log_path.empty()) {
        log = std::make_unique<std::ofstream>(f.log_path);
        if (!*log) throw std::invalid_argument("cannot write " + f.log_path);
        sc.event_log = log.get();
    }
    RunResult r;
    try {
        r = f.reelection ? measure_reelection(sc) : run_scenario(sc);
    } catch (const ScenarioError& e) {
        err << "error: " << e.what() << '\n';
        return kExitAssumption;
    }
    Sink sink(f.out_path, out);
    nlohmann::json doc{{"config", scenario_to_json(sc)}, {"result", result_to_json(r)}};
    doc["config"]["reelection"] = f.reelection;
    sink.get() << doc.dump(2) << '\n';
    return r.assumptions_hold ? kExitOk : kExitAssumption;
}

int do_validate(const Scenario& sc, const Flags& f, std::ostream& out)
{
    nlohmann::json doc{{"config", scenario_to_json(sc)}};
    std::vector<std::string> violations;
    try {
        const Digraph g = build_topology(sc);
        violations = check_assumptions(sc, g);
        doc["n"] = g.n();
        doc["edges"] = g.edge_count();
    } catch (const TopologyError& e) {
        violations.emplace_back(std::string("topology: ") + e.what());
    }
    doc["valid"] = violations.empty();
    doc["violations"] = violations;
    Sink sink(f.out_path, out);
    sink.get() << doc.dump(2) << '\n';
    return violations.empty() ? kExitOk : kExitAssumption;
}

int do_sweep(SweepSpec spec, const Flags& f, std::ostream& out, std::ostream& err)
{
    if (!f.sizes.empty()) spec.sizes = f.sizes;
    if (!f.drop_rates.empty()) spec.drop_rates = f.drop_rates;
    if (!f.T_values.empty()) spec.T_values = f.T_values;
    if (f.repetitions > 0) spec.repetitions = f.repetitions;
    if (f.first_seed > 0) spec.first_seed = f.first_seed;
    if (f.reelection) spec.reelection = true;
    std::vector<SweepRow> rows;
    try {
        rows = sweep(spec);
    } catch (const ScenarioError& e) {
        err << "error: " << e.what() << '\n';
        return kExitAssumption;
    }
    Sink sink(f.out_path, out);
    sink.get() << "# config=" << sweep_to_json(spec).dump() << '\n';
    write_csv(sink.get(), spec, rows);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Eventual leader election simulator over ADD channels", "omega_sim"};
    app.require_subcommand(1);
    Flags f;

    auto* run = app.add_subcommand("run", "run one scenario and print the result as JSON");
    auto* val = app.add_subcommand("validate", "check a scenario's assumptions");
    auto* swp = app.add_subcommand("sweep", "run a parameter sweep and write CSV");

    const Options run_opts = add_scenario_flags(*run, f);
    const Options val_opts = add_scenario_flags(*val, f);
    const Options swp_opts = add_scenario_flags(*swp, f);
    for (auto* sub : {run, val}) {
        sub->add_option("--scenario", f.scenario_path, "scenario JSON file")->check(CLI::ExistingFile);
        sub->add_option("--out", f.out_path, "output file (default stdout)");
    }
    run->add_option("--log", f.log_path, "JSON-lines event log");
    run->add_flag("--reelection", f.reelection, "crash the leader at convergence and measure re-election");
    swp->add_option("--config", f.config_path, "sweep JSON file")->check(CLI::ExistingFile);
    swp->add_option("--out", f.out_path, "CSV output file (default stdout)");
    swp->add_option("--sizes", f.sizes, "process counts")->delimiter(',');
    swp->add_option("--drop-rates", f.drop_rates, "drop probabilities")->delimiter(',');
    swp->add_option("--T-values", f.T_values, "heartbeat periods")->delimiter(',');
    swp->add_option("--repetitions", f.repetitions, "seeds per configuration");
    swp->add_option("--first-seed", f.first_seed, "seed of the first repetition");
    swp->add_flag("--reelection", f.reelection, "measure re-election instead of first convergence");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (*run || *val) {
            const Options& o = *run ? run_opts : val_opts;
            Scenario sc;
            if (!f.scenario_path.empty())
                sc = scenario_from_json(load_json_file(f.scenario_path), dir_of(f.scenario_path));
            sc = apply_flags(std::move(sc), f, o);
            return *run ? do_run(sc, f, out, err) : do_validate(sc, f, out);
        }
        SweepSpec spec;
        if (!f.config_path.empty()) spec = sweep_from_json(load_json_file(f.config_path), dir_of(f.config_path));
        spec.base = apply_flags(std::move(spec.base), f, swp_opts);
        return do_sweep(std::move(spec), f, out, err);
    } catch (const CLI::ValidationError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ScenarioError& e) {
        err << "error: " << e.what() << '\n';
        return kExitAssumption;
    } catch (const TopologyError& e) {
        err << "error: " << e.what() << '\n';
        return kExitAssumption;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace omega
