#pragma once

#include <cstdint>
#include <limits>

namespace omega {

// Process identities are 1..n; the smaller id is the preferred leader.
using ProcessId = std::uint32_t;

// Ticks of the external reference clock. Durations share the unit.
using SimTime = std::int64_t;
using Duration = std::int64_t;

inline constexpr SimTime kNever = std::numeric_limits<SimTime>::max();

struct AddParams {
    int K = 1;                   // at least one of every K consecutive messages is timely
    Duration D = 1;              // timely latency bound
    SimTime stabilization = 0;   // channel behaviour is arbitrary before this instant

    friend bool operator==(const AddParams&, const AddParams&) = default;
};

// Maximum gap between consecutive receptions on a stabilized ADD channel
// whose sender transmits every T ticks: (K-1)*T + D.
Duration compute_delta(int K, Duration D, Duration T);

inline Duration compute_delta(const AddParams& p, Duration T) { return compute_delta(p.K, p.D, T); }

}  // namespace omega
