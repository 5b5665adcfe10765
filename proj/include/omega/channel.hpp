#pragma once

#include "omega/types.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace omega {

enum class LossMode : std::uint8_t {
    kIid,        // independent drops with probability p, delivered messages take [1, D]
    kStrictAdd,  // like kIid but never more than K-1 consecutive drops after stabilization
    kScripted,   // cyclic per-send script, used by the exhaustive adversary
};

const char* to_string(LossMode mode);
LossMode loss_mode_from_string(const std::string& s);

struct ChannelConfig {
    AddParams add;
    LossMode mode = LossMode::kIid;
    double drop_probability = 0.0;
    // Before add.stabilization: drop with this probability, otherwise deliver
    // after a delay uniform in [1, 10*D] ("chaotic" when below 1).
    double pre_stabilization_drop = 1.0;
    // kScripted only: outcome of the i-th send is script[i % size]; nullopt drops.
    std::vector<std::optional<Duration>> script;

    friend bool operator==(const ChannelConfig&, const ChannelConfig&) = default;
};

// True when the configuration guarantees (or, for kIid with p < 1, almost
// surely yields) the eventual ADD property.
bool satisfies_eventual_add(const ChannelConfig& cfg);

// True iff every cyclic window of K consecutive entries contains a delivery
// with delay <= D.
bool script_satisfies_add(const std::vector<std::optional<Duration>>& script, int K, Duration D);

struct DeliveryOutcome {
    std::optional<SimTime> deliver_at;  // nullopt: dropped

    bool dropped() const { return !deliver_at.has_value(); }
};

// Per directed edge delivery behaviour with its own random stream.
class Channel {
public:
    Channel(ChannelConfig config, std::uint64_t stream_seed);

    DeliveryOutcome on_send(SimTime t);

    const ChannelConfig& config() const { return config_; }
    int consecutive_misses() const { return consecutive_misses_; }

    // Test hook: pretend the last `misses` post-stabilization sends were dropped.
    void set_consecutive_misses(int misses) { consecutive_misses_ = misses; }

private:
    Duration timely_delay();

    ChannelConfig config_;
    std::mt19937_64 rng_;
    int consecutive_misses_ = 0;
    std::optional<std::uint64_t> drops_before_next_delivery_;
    std::size_t script_pos_ = 0;
};

// Stream seed for the channel from -> to; depends only on the endpoints so
// adding an edge never perturbs another edge's draws.
std::uint64_t channel_stream_seed(std::uint64_t master_seed, std::uint32_t from, std::uint32_t to);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace omega
