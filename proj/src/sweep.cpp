#include "omega/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <iomanip>
#include <sstream>
#include <thread>

namespace omega {

unsigned default_workers()
{
    if (const char* env = std::getenv("OMEGA_SIM_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct Job {
    Scenario sc;
    std::size_t config = 0;
};

SweepRow run_job(const Job& job, const SweepSpec& spec)
{
    Scenario sc = job.sc;
    if (spec.horizon) {
        sc.horizon = *spec.horizon;
    } else {
        const Digraph g = build_topology(sc);
        const int d = std::max(1, effective_diameter(g, sc.channel, correct_processes(sc, g.n())));
        const Duration delta = compute_delta(sc.channel.add.K, sc.channel.add.D, sc.T);
        sc.horizon = std::max<SimTime>(spec.min_horizon, spec.horizon_per_hop * d * delta);
        if (spec.reelection) sc.horizon *= 2;
    }
    const RunResult r = spec.reelection ? measure_reelection(sc) : run_scenario(sc);

    SweepRow row;
    row.n = r.n;
    row.diameter = r.diameter;
    row.K = sc.channel.add.K;
    row.D = sc.channel.add.D;
    row.T = sc.T;
    row.delta = r.delta;
    row.drop_rate = sc.channel.drop_probability;
    row.mode = sc.channel.mode;
    row.seed = sc.seed;
    row.horizon = sc.horizon;
    row.violations = r.violations.size();
    for (const auto& v : r.violations) row.violated_oracles.push_back(v.oracle);
    row.assumptions_hold = r.assumptions_hold;
    if (spec.reelection) {
        if (r.reelection && r.reelection->reelection_time) row.converged = 1;
        row.convergence_time = r.convergence_time ? std::optional<double>(static_cast<double>(*r.convergence_time))
                                                  : std::nullopt;
        if (r.reelection) {
            if (r.reelection->discard_time) row.discard_time = static_cast<double>(*r.reelection->discard_time);
            if (r.reelection->reelection_time)
                row.reelection_time = static_cast<double>(*r.reelection->reelection_time);
        }
    } else if (r.convergence_time) {
        row.converged = 1;
        row.convergence_time = static_cast<double>(*r.convergence_time);
    }
    row.total_messages = static_cast<double>(r.total_messages);
    row.max_message_bits = static_cast<double>(r.max_message_bits);
    return row;
}

std::optional<double> mean_of(const std::vector<SweepRow>& rows, std::optional<double> SweepRow::*field)
{
    double sum = 0;
    int count = 0;
    for (const auto& r : rows)
        if ((r.*field)) {
            sum += *(r.*field);
            ++count;
        }
    if (count == 0) return std::nullopt;
    return sum / count;
}

SweepRow mean_row(const std::vector<SweepRow>& runs)
{
    SweepRow m = runs.front();
    m.seed.reset();
    m.runs = static_cast<int>(runs.size());
    m.converged = 0;
    m.diameter = 0;
    m.total_messages = 0;
    m.max_message_bits = 0;
    m.violations = 0;
    m.assumptions_hold = true;
    for (const auto& r : runs) {
        m.converged += r.converged;
        m.diameter += r.diameter;
        m.total_messages += r.total_messages;
        m.max_message_bits = std::max(m.max_message_bits, r.max_message_bits);
        m.violations += r.violations;
        m.assumptions_hold = m.assumptions_hold && r.assumptions_hold;
    }
    m.diameter /= static_cast<double>(runs.size());
    m.total_messages /= static_cast<double>(runs.size());
    m.convergence_time = mean_of(runs, &SweepRow::convergence_time);
    m.discard_time = mean_of(runs, &SweepRow::discard_time);
    m.reelection_time = mean_of(runs, &SweepRow::reelection_time);
    return m;
}

}  // namespace

std::vector<SweepRow> sweep(const SweepSpec& spec)
{
    if (spec.repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
    const std::vector<std::uint32_t> sizes = spec.sizes.empty() ? std::vector{spec.base.topology.n} : spec.sizes;
    const std::vector<double> drops =
        spec.drop_rates.empty() ? std::vector{spec.base.channel.drop_probability} : spec.drop_rates;
    const std::vector<Duration> Ts = spec.T_values.empty() ? std::vector{spec.base.T} : spec.T_values;

    std::vector<Job> jobs;
    std::size_t config = 0;
    for (auto n : sizes)
        for (double p : drops)
            for (Duration T : Ts) {
                for (int rep = 0; rep < spec.repetitions; ++rep) {
                    Job j{spec.base, config};
                    j.sc.topology.n = n;
                    j.sc.channel.drop_probability = p;
                    j.sc.T = T;
                    j.sc.seed = spec.first_seed + static_cast<std::uint64_t>(rep);
                    j.sc.event_log = nullptr;
                    jobs.push_back(std::move(j));
                }
                ++config;
            }

    std::vector<SweepRow> results(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    const unsigned workers = std::min<std::size_t>(spec.workers ? spec.workers : default_workers(), jobs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                results[i] = run_job(jobs[i], spec);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<SweepRow> rows;
    std::size_t i = 0;
    while (i < jobs.size()) {
        std::size_t j = i;
        while (j < jobs.size() && jobs[j].config == jobs[i].config) ++j;
        std::vector<SweepRow> runs(results.begin() + static_cast<std::ptrdiff_t>(i),
                                   results.begin() + static_cast<std::ptrdiff_t>(j));
        rows.insert(rows.end(), runs.begin(), runs.end());
        rows.push_back(mean_row(runs));
        i = j;
    }
    return rows;
}

std::vector<SweepRow> mean_rows(const std::vector<SweepRow>& rows)
{
    std::vector<SweepRow> out;
    std::copy_if(rows.begin(), rows.end(), std::back_inserter(out), [](const SweepRow& r) { return r.is_mean(); });
    return out;
}

namespace {

std::string fmt(double v)
{
    std::ostringstream s;
    s << std::setprecision(10) << v;
    return s.str();
}

std::string fmt(const std::optional<double>& v)
{
    return v ? fmt(*v) : std::string();
}

}  // namespace

void write_csv(std::ostream& out, const SweepSpec& spec, const std::vector<SweepRow>& rows)
{
    out << "# algorithm=" << to_string(spec.base.algorithm) << " topology=" << to_string(spec.base.topology.kind)
        << " mode=" << to_string(spec.base.channel.mode) << " K=" << spec.base.channel.add.K
        << " D=" << spec.base.channel.add.D << " stabilization=" << spec.base.channel.add.stabilization
        << " repetitions=" << spec.repetitions << " first_seed=" << spec.first_seed
        << " reelection=" << (spec.reelection ? "true" : "false") << '\n';
    out << "# time_bound_slack=" << kTimeBoundSlack << '\n';
    std::vector<std::pair<Duration, Duration>> seen;
    for (const auto& r : rows) {
        if (std::find(seen.begin(), seen.end(), std::pair{r.T, r.delta}) != seen.end()) continue;
        seen.emplace_back(r.T, r.delta);
        out << "# T=" << r.T << " delta=" << r.delta << '\n';
    }
    out << kCsvColumns << '\n';
    for (const auto& r : rows) {
        out << r.n << ',' << fmt(r.diameter) << ',' << r.K << ',' << r.D << ',' << r.T << ',' << fmt(r.drop_rate)
            << ',' << to_string(r.mode) << ',' << (r.seed ? std::to_string(*r.seed) : std::string("mean")) << ','
            << fmt(r.convergence_time) << ',' << fmt(r.discard_time) << ',' << fmt(r.reelection_time) << ','
            << fmt(r.total_messages) << ',' << fmt(r.max_message_bits) << '\n';
    }
}

}  // namespace omega
