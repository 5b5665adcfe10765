#pragma once

#include "omega/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace omega {

class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ALIVE(leader, hopbound) of the known-membership algorithm.
struct AliveKnown {
    ProcessId leader = 0;
    int hopbound = 0;

    friend bool operator==(const AliveKnown&, const AliveKnown&) = default;
};

enum class Label : std::uint8_t { kNew = 0, kAck = 1 };

struct PendingEntry {
    Label label = Label::kNew;
    ProcessId id = 0;

    friend auto operator<=>(const PendingEntry&, const PendingEntry&) = default;
};

struct LeaderInfo {
    ProcessId leader = 0;
    int hopbound = 0;

    friend bool operator==(const LeaderInfo&, const LeaderInfo&) = default;
};

// ALIVE(leader, hopbound, pending) of the unknown-membership algorithm. An
// empty `info` is the (bottom, bottom) form. `pending` is kept sorted and
// duplicate free.
struct AliveUnknown {
    std::optional<LeaderInfo> info;
    std::vector<PendingEntry> pending;
    std::optional<std::uint64_t> sequence;  // only with the staleness guard

    friend bool operator==(const AliveUnknown&, const AliveUnknown&) = default;
};

using Message = std::variant<AliveKnown, AliveUnknown>;

// Bits needed for one field of a known-membership message: ceil(log2(n+1)).
int field_bits(std::uint64_t n);

// Byte bound of an encoded known-membership message: 2*field_bits(n) bits
// rounded up to whole bytes.
std::size_t known_size_bound(std::uint32_t n);

// Byte bound of an unknown-membership message with an empty pending set.
std::size_t unknown_quiescent_size_bound(std::uint32_t n, std::optional<std::uint64_t> sequence = {});

std::vector<std::uint8_t> encode_known(const AliveKnown& msg, std::uint32_t n);
AliveKnown decode_known(std::span<const std::uint8_t> bytes, std::uint32_t n);

std::vector<std::uint8_t> encode_unknown(const AliveUnknown& msg);
AliveUnknown decode_unknown(std::span<const std::uint8_t> bytes);

// Size of the encoding without materializing it.
std::size_t encoded_size(const AliveKnown& msg, std::uint32_t n);
std::size_t encoded_size(const AliveUnknown& msg);
std::size_t encoded_size(const Message& msg, std::uint32_t n);

// Leader carried by a message, if any.
std::optional<ProcessId> leader_field(const Message& msg);

std::size_t varint_size(std::uint64_t v);

}  // namespace omega
