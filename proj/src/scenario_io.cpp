#include "omega/scenario_io.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

namespace omega {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where)
{
    if (!j.is_object()) throw std::invalid_argument(where + " must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw std::invalid_argument("unknown key '" + key + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out)
{
    if (j.contains(key)) out = j.at(key).get<T>();
}

ChannelConfig channel_from_json(const json& j, ChannelConfig c)
{
    reject_unknown_keys(j, {"K", "D", "stabilization", "mode", "drop_rate", "pre_drop", "script"}, "channel");
    read(j, "K", c.add.K);
    read(j, "D", c.add.D);
    read(j, "stabilization", c.add.stabilization);
    if (j.contains("mode")) c.mode = loss_mode_from_string(j.at("mode").get<std::string>());
    read(j, "drop_rate", c.drop_probability);
    read(j, "pre_drop", c.pre_stabilization_drop);
    if (j.contains("script")) {
        c.script.clear();
        for (const auto& s : j.at("script")) {
            if (s.is_null())
                c.script.emplace_back(std::nullopt);
            else
                c.script.emplace_back(s.get<Duration>());
        }
    }
    if (c.drop_probability < 0 || c.drop_probability > 1) throw std::invalid_argument("drop_rate must be in [0, 1]");
    if (c.pre_stabilization_drop < 0 || c.pre_stabilization_drop > 1)
        throw std::invalid_argument("pre_drop must be in [0, 1]");
    return c;
}

json channel_to_json(const ChannelConfig& c)
{
    json j{{"K", c.add.K},       {"D", c.add.D},
           {"stabilization", c.add.stabilization},
           {"mode", to_string(c.mode)},
           {"drop_rate", c.drop_probability},
           {"pre_drop", c.pre_stabilization_drop}};
    if (!c.script.empty()) {
        json s = json::array();
        for (const auto& d : c.script) s.push_back(d ? json(*d) : json(nullptr));
        j["script"] = s;
    }
    return j;
}

}  // namespace

json load_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

Scenario scenario_from_json(const json& j, const std::string& base_dir, Scenario sc)
{
    reject_unknown_keys(j,
                        {"algorithm", "topology", "channel", "T", "crashes", "horizon", "seed", "staleness_guard",
                         "penalties", "clock_offsets", "enforce_assumptions", "check_invariants"},
                        "scenario");
    try {
        if (j.contains("algorithm")) sc.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
        if (j.contains("topology")) {
            const auto& t = j.at("topology");
            reject_unknown_keys(t, {"kind", "n", "degree", "extra_edges", "edges", "seed"}, "topology");
            if (t.contains("kind")) sc.topology.kind = topology_kind_from_string(t.at("kind").get<std::string>());
            read(t, "n", sc.topology.n);
            read(t, "degree", sc.topology.degree);
            read(t, "extra_edges", sc.topology.extra_edges);
            if (t.contains("edges")) {
                std::filesystem::path p = t.at("edges").get<std::string>();
                if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
                sc.topology.edge_list_path = p.string();
                if (!t.contains("kind")) sc.topology.kind = TopologyKind::kEdgeList;
            }
            if (t.contains("seed")) sc.topology.graph_seed = t.at("seed").get<std::uint64_t>();
        }
        if (j.contains("channel")) sc.channel = channel_from_json(j.at("channel"), sc.channel);
        read(j, "T", sc.T);
        if (j.contains("crashes")) {
            sc.crashes.clear();
            for (const auto& c : j.at("crashes")) {
                reject_unknown_keys(c, {"process", "time"}, "crash");
                sc.crashes.push_back({c.at("process").get<ProcessId>(), c.at("time").get<SimTime>()});
            }
        }
        read(j, "horizon", sc.horizon);
        read(j, "seed", sc.seed);
        read(j, "staleness_guard", sc.staleness_guard);
        read(j, "penalties", sc.penalties);
        read(j, "clock_offsets", sc.random_clock_offsets);
        read(j, "enforce_assumptions", sc.enforce_assumptions);
        read(j, "check_invariants", sc.check_invariants);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("scenario: ") + e.what());
    }
    return sc;
}

json scenario_to_json(const Scenario& sc)
{
    json topo{{"kind", to_string(sc.topology.kind)}, {"n", sc.topology.n}};
    if (sc.topology.kind == TopologyKind::kRegular) topo["degree"] = sc.topology.degree;
    if (sc.topology.kind == TopologyKind::kRandomConnected) topo["extra_edges"] = sc.topology.extra_edges;
    if (sc.topology.kind == TopologyKind::kEdgeList) topo["edges"] = sc.topology.edge_list_path;
    if (sc.topology.graph_seed) topo["seed"] = *sc.topology.graph_seed;
    json crashes = json::array();
    for (const auto& c : sc.crashes) crashes.push_back({{"process", c.process}, {"time", c.time}});
    return json{{"algorithm", to_string(sc.algorithm)},
                {"topology", topo},
                {"channel", channel_to_json(sc.channel)},
                {"T", sc.T},
                {"crashes", crashes},
                {"horizon", sc.horizon},
                {"seed", sc.seed},
                {"staleness_guard", sc.staleness_guard},
                {"penalties", sc.penalties},
                {"clock_offsets", sc.random_clock_offsets},
                {"enforce_assumptions", sc.enforce_assumptions},
                {"check_invariants", sc.check_invariants}};
}

SweepSpec sweep_from_json(const json& j, const std::string& base_dir)
{
    reject_unknown_keys(j,
                        {"scenario", "sizes", "drop_rates", "T_values", "repetitions", "first_seed", "reelection",
                         "horizon", "horizon_per_hop", "min_horizon"},
                        "sweep");
    SweepSpec s;
    try {
        if (j.contains("scenario")) s.base = scenario_from_json(j.at("scenario"), base_dir);
        read(j, "sizes", s.sizes);
        read(j, "drop_rates", s.drop_rates);
        read(j, "T_values", s.T_values);
        read(j, "repetitions", s.repetitions);
        read(j, "first_seed", s.first_seed);
        read(j, "reelection", s.reelection);
        if (j.contains("horizon") && !j.at("horizon").is_null()) s.horizon = j.at("horizon").get<SimTime>();
        read(j, "horizon_per_hop", s.horizon_per_hop);
        read(j, "min_horizon", s.min_horizon);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("sweep: ") + e.what());
    }
    return s;
}

json sweep_to_json(const SweepSpec& s)
{
    json j{{"scenario", scenario_to_json(s.base)},
           {"sizes", s.sizes},
           {"drop_rates", s.drop_rates},
           {"T_values", s.T_values},
           {"repetitions", s.repetitions},
           {"first_seed", s.first_seed},
           {"reelection", s.reelection},
           {"horizon_per_hop", s.horizon_per_hop},
           {"min_horizon", s.min_horizon}};
    j["horizon"] = s.horizon ? json(*s.horizon) : json(nullptr);
    return j;
}

json result_to_json(const RunResult& r)
{
    json j{{"n", r.n},
           {"diameter", r.diameter},
           {"delta", r.delta},
           {"horizon", r.horizon},
           {"expected_leader", r.expected_leader},
           {"convergence_time", r.convergence_time ? json(*r.convergence_time) : json(nullptr)},
           {"timeouts_settled", r.timeouts_settled},
           {"total_messages", r.total_messages},
           {"max_message_bits", r.max_message_bits},
           {"assumptions_hold", r.assumptions_hold},
           {"assumption_violations", r.assumption_violations}};
    if (r.reelection) {
        const auto& re = *r.reelection;
        j["reelection"] = {{"crashed", re.crashed},
                           {"crash_time", re.crash_time},
                           {"new_leader", re.new_leader},
                           {"discard_time", re.discard_time ? json(*re.discard_time) : json(nullptr)},
                           {"reelection_time", re.reelection_time ? json(*re.reelection_time) : json(nullptr)}};
    } else {
        j["reelection"] = nullptr;
    }
    json v = json::array();
    for (const auto& x : r.violations) v.push_back({{"oracle", x.oracle}, {"detail", x.detail}});
    j["violations"] = v;
    json tl = json::array();
    for (const auto& s : r.timeline) tl.push_back({{"t", s.time}, {"leaders", s.leaders}});
    j["timeline"] = tl;
    return j;
}

}  // namespace omega
