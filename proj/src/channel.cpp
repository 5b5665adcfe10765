#include "omega/channel.hpp"

#include <limits>
#include <stdexcept>

namespace omega {

const char* to_string(LossMode mode)
{
    switch (mode) {
    case LossMode::kIid: return "iid";
    case LossMode::kStrictAdd: return "strict";
    case LossMode::kScripted: return "scripted";
    }
    return "?";
}

LossMode loss_mode_from_string(const std::string& s)
{
    if (s == "iid") return LossMode::kIid;
    if (s == "strict") return LossMode::kStrictAdd;
    if (s == "scripted") return LossMode::kScripted;
    throw std::invalid_argument("unknown loss mode '" + s + "' (expected iid|strict|scripted)");
}

bool script_satisfies_add(const std::vector<std::optional<Duration>>& script, int K, Duration D)
{
    if (script.empty() || K < 1) return false;
    const std::size_t len = script.size();
    for (std::size_t start = 0; start < len; ++start) {
        bool timely = false;
        for (int i = 0; i < K && !timely; ++i) {
            const auto& s = script[(start + static_cast<std::size_t>(i)) % len];
            timely = s.has_value() && *s <= D;
        }
        if (!timely) return false;
    }
    return true;
}

bool satisfies_eventual_add(const ChannelConfig& cfg)
{
    switch (cfg.mode) {
    case LossMode::kStrictAdd: return cfg.add.K >= 1;
    case LossMode::kIid: return cfg.drop_probability < 1.0;
    case LossMode::kScripted: return script_satisfies_add(cfg.script, cfg.add.K, cfg.add.D);
    }
    return false;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t channel_stream_seed(std::uint64_t master_seed, std::uint32_t from, std::uint32_t to)
{
    return splitmix64(splitmix64(master_seed) ^ ((static_cast<std::uint64_t>(from) << 32) | to));
}

Channel::Channel(ChannelConfig config, std::uint64_t stream_seed)
    : config_(std::move(config)), rng_(stream_seed)
{
    if (config_.add.K < 1) throw std::invalid_argument("channel K must be >= 1");
    if (config_.add.D < 0) throw std::invalid_argument("channel D must be >= 0");
    if (config_.drop_probability < 0.0 || config_.drop_probability > 1.0)
        throw std::invalid_argument("drop probability must lie in [0,1]");
    if (config_.mode == LossMode::kScripted && config_.script.empty())
        throw std::invalid_argument("scripted channel needs a non-empty script");
}

Duration Channel::timely_delay()
{
    if (config_.add.D == 0) return 0;
    return std::uniform_int_distribution<Duration>(1, config_.add.D)(rng_);
}

DeliveryOutcome Channel::on_send(SimTime t)
{
    if (config_.mode == LossMode::kScripted) {
        const auto& step = config_.script[script_pos_++ % config_.script.size()];
        if (!step) return {};
        return {t + *step};
    }

    if (t < config_.add.stabilization) {
        if (std::bernoulli_distribution(config_.pre_stabilization_drop)(rng_)) return {};
        const Duration hi = 10 * std::max<Duration>(config_.add.D, 1);
        return {t + std::uniform_int_distribution<Duration>(1, hi)(rng_)};
    }

    if (!drops_before_next_delivery_) {
        const double p = config_.drop_probability;
        if (p >= 1.0)
            drops_before_next_delivery_ = std::numeric_limits<std::uint64_t>::max();
        else
            drops_before_next_delivery_ = std::geometric_distribution<std::uint64_t>(1.0 - p)(rng_);
    }
    const bool forced = config_.mode == LossMode::kStrictAdd && consecutive_misses_ >= config_.add.K - 1;
    if (*drops_before_next_delivery_ > 0 && !forced) {
        --*drops_before_next_delivery_;
        ++consecutive_misses_;
        return {};
    }
    drops_before_next_delivery_.reset();
    consecutive_misses_ = 0;
    return {t + timely_delay()};
}

}  // namespace omega
