#pragma once

#include "omega/harness.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace omega {

struct SweepSpec {
    Scenario base;                       // topology kind, channel, algorithm, ...
    std::vector<std::uint32_t> sizes;    // empty: base.topology.n
    std::vector<double> drop_rates;      // empty: base.channel.drop_probability
    std::vector<Duration> T_values;      // empty: base.T
    int repetitions = 10;
    std::uint64_t first_seed = 1;
    bool reelection = false;
    // Fixed horizon; when unset each run gets horizon_per_hop * diameter * Delta,
    // but at least min_horizon.
    std::optional<SimTime> horizon;
    SimTime horizon_per_hop = 12;
    SimTime min_horizon = 2000;
    unsigned workers = 0;  // 0: OMEGA_SIM_WORKERS, else hardware concurrency
};

struct SweepRow {
    std::uint32_t n = 0;
    double diameter = 0;
    int K = 0;
    Duration D = 0;
    Duration T = 0;
    Duration delta = 0;
    double drop_rate = 0;
    LossMode mode = LossMode::kIid;
    std::optional<std::uint64_t> seed;  // nullopt on mean rows
    int runs = 1;
    int converged = 0;
    std::optional<double> convergence_time;
    std::optional<double> discard_time;
    std::optional<double> reelection_time;
    double total_messages = 0;
    double max_message_bits = 0;
    SimTime horizon = 0;
    std::size_t violations = 0;
    std::vector<std::string> violated_oracles;  // per-run rows only
    bool assumptions_hold = true;

    bool is_mean() const { return !seed.has_value(); }
};

// One row per run, followed after each configuration's runs by its mean row.
// Order is (size, drop rate, T, seed) regardless of worker count.
std::vector<SweepRow> sweep(const SweepSpec& spec);

// Convenience filters.
std::vector<SweepRow> mean_rows(const std::vector<SweepRow>& rows);

inline constexpr const char* kCsvColumns =
    "n,diameter,K,D,T,drop_rate,mode,seed,convergence_time,discard_time,reelection_time,total_messages,"
    "max_message_bits";

// Writes `#` comment lines (parameters, Delta, time-bound slack), the header
// and the rows. Missing values are empty fields; mean rows have seed "mean".
void write_csv(std::ostream& out, const SweepSpec& spec, const std::vector<SweepRow>& rows);

unsigned default_workers();

}  // namespace omega
