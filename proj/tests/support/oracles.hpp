#pragma once

// Reference implementations used only by tests. They are written differently
// from the library code on purpose (matrices, recursion, brute force) so that
// a shared bug is unlikely.

#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

using Edge = std::pair<std::uint32_t, std::uint32_t>;

// Floyd-Warshall over directed edges on 1..n. -1 if some pair in `nodes`
// (all when empty) is unreachable.
int diameter(std::uint32_t n, const std::vector<Edge>& edges, const std::set<std::uint32_t>& nodes = {});

// Nodes reachable from root by depth-first search, staying inside `nodes`.
std::set<std::uint32_t> reachable(std::uint32_t n, const std::vector<Edge>& edges, std::uint32_t root,
                                  const std::set<std::uint32_t>& nodes);

struct Change {
    std::int64_t time;
    std::uint32_t process;
    std::uint32_t leader;
};

// Materializes every process's leader at every instant 0..horizon and scans
// backwards for the first instant from which all of `correct` agree on
// min(correct) up to the horizon.
std::optional<std::int64_t> convergence_by_scan(std::uint32_t n, const std::vector<Change>& changes,
                                                const std::set<std::uint32_t>& correct, std::int64_t horizon);

struct Fit {
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
};

// Ordinary least squares y = slope*x + intercept with the coefficient of determination.
Fit least_squares(const std::vector<double>& x, const std::vector<double>& y);

// True iff every window of k consecutive outcomes (nullopt = dropped, else
// latency) contains a latency <= d.
bool every_window_timely(const std::vector<std::optional<std::int64_t>>& latencies, int k, std::int64_t d);

}  // namespace oracle
