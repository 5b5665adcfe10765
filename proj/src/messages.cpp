#include "omega/messages.hpp"

#include <algorithm>
#include <bit>
#include <string>

namespace omega {

Duration compute_delta(int K, Duration D, Duration T)
{
    if (K < 1) throw std::invalid_argument("compute_delta: K must be >= 1, got " + std::to_string(K));
    if (D < 0) throw std::invalid_argument("compute_delta: D must be >= 0");
    if (T < 1) throw std::invalid_argument("compute_delta: T must be >= 1");
    return static_cast<Duration>(K - 1) * T + D;
}

namespace {

constexpr std::uint8_t kHasLeader = 0x80;
constexpr std::uint8_t kHasPending = 0x40;
constexpr std::uint8_t kHasSequence = 0x20;
constexpr std::uint8_t kWidthMask = 0x1f;

std::size_t packed_bytes(int width) { return (2 * static_cast<std::size_t>(width) + 7) / 8; }

// Two `width`-bit fields, most significant bit first, zero padded.
void pack_pair(std::vector<std::uint8_t>& out, std::uint64_t a, std::uint64_t b, int width)
{
    const std::size_t start = out.size();
    out.resize(start + packed_bytes(width), 0);
    std::size_t bit = 0;
    auto put = [&](std::uint64_t v) {
        for (int i = width - 1; i >= 0; --i, ++bit) {
            if ((v >> i) & 1U) out[start + bit / 8] |= static_cast<std::uint8_t>(0x80U >> (bit % 8));
        }
    };
    put(a);
    put(b);
}

std::pair<std::uint64_t, std::uint64_t> unpack_pair(std::span<const std::uint8_t> in, int width)
{
    if (in.size() != packed_bytes(width)) throw DecodeError("packed field length mismatch");
    std::size_t bit = 0;
    auto get = [&]() {
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i, ++bit) v = (v << 1) | ((in[bit / 8] >> (7 - bit % 8)) & 1U);
        return v;
    };
    const auto a = get();
    const auto b = get();
    for (; bit < in.size() * 8; ++bit) {
        if ((in[bit / 8] >> (7 - bit % 8)) & 1U) throw DecodeError("nonzero padding bits");
    }
    return {a, b};
}

void put_varint(std::vector<std::uint8_t>& out, std::uint64_t v)
{
    while (v >= 0x80) {
        out.push_back(static_cast<std::uint8_t>(v | 0x80));
        v >>= 7;
    }
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint64_t get_varint(std::span<const std::uint8_t> in, std::size_t& pos)
{
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
        if (pos >= in.size()) throw DecodeError("truncated varint");
        const std::uint8_t byte = in[pos++];
        v |= static_cast<std::uint64_t>(byte & 0x7f) << shift;
        if ((byte & 0x80) == 0) {
            if (byte == 0 && shift > 0) throw DecodeError("non-canonical varint");
            return v;
        }
    }
    throw DecodeError("varint overflow");
}

void check_known(const AliveKnown& m, std::uint32_t n)
{
    if (n < 2) throw std::invalid_argument("known-membership messages need n >= 2");
    if (m.leader < 1 || m.leader > n) throw std::invalid_argument("leader outside 1..n");
    if (m.hopbound < 1 || static_cast<std::uint32_t>(m.hopbound) > n - 1)
        throw std::invalid_argument("hopbound outside 1..n-1");
}

int unknown_width(const LeaderInfo& info)
{
    return field_bits(std::max<std::uint64_t>(info.leader, static_cast<std::uint64_t>(info.hopbound)));
}

void check_unknown(const AliveUnknown& m)
{
    if (m.info) {
        if (m.info->leader < 1) throw std::invalid_argument("leader must be >= 1");
        if (m.info->hopbound < 1) throw std::invalid_argument("hopbound must be >= 1");
    }
    for (std::size_t i = 0; i < m.pending.size(); ++i) {
        if (m.pending[i].id < 1) throw std::invalid_argument("pending id must be >= 1");
        if (i > 0 && !(m.pending[i - 1] < m.pending[i]))
            throw std::invalid_argument("pending entries must be sorted and unique");
    }
}

std::uint64_t pending_code(const PendingEntry& e)
{
    return (static_cast<std::uint64_t>(e.id) << 1) | static_cast<std::uint64_t>(e.label);
}

}  // namespace

int field_bits(std::uint64_t n) { return static_cast<int>(std::bit_width(n)); }

std::size_t known_size_bound(std::uint32_t n) { return packed_bytes(field_bits(n)); }

std::size_t unknown_quiescent_size_bound(std::uint32_t n, std::optional<std::uint64_t> sequence)
{
    return 1 + known_size_bound(n) + (sequence ? varint_size(*sequence) : 0);
}

std::size_t varint_size(std::uint64_t v)
{
    std::size_t s = 1;
    while (v >= 0x80) {
        v >>= 7;
        ++s;
    }
    return s;
}

std::vector<std::uint8_t> encode_known(const AliveKnown& msg, std::uint32_t n)
{
    check_known(msg, n);
    std::vector<std::uint8_t> out;
    pack_pair(out, msg.leader, static_cast<std::uint64_t>(msg.hopbound), field_bits(n));
    return out;
}

AliveKnown decode_known(std::span<const std::uint8_t> bytes, std::uint32_t n)
{
    if (n < 2) throw std::invalid_argument("known-membership messages need n >= 2");
    const auto [leader, hb] = unpack_pair(bytes, field_bits(n));
    AliveKnown m{static_cast<ProcessId>(leader), static_cast<int>(hb)};
    if (leader < 1 || leader > n) throw DecodeError("leader outside 1..n");
    if (hb < 1 || hb > n - 1) throw DecodeError("hopbound outside 1..n-1");
    return m;
}

std::vector<std::uint8_t> encode_unknown(const AliveUnknown& msg)
{
    check_unknown(msg);
    std::vector<std::uint8_t> out;
    std::uint8_t flags = 0;
    int width = 0;
    if (msg.info) {
        width = unknown_width(*msg.info);
        if (width > kWidthMask) throw std::invalid_argument("leader/hopbound too large to encode");
        flags |= kHasLeader | static_cast<std::uint8_t>(width);
    }
    if (!msg.pending.empty()) flags |= kHasPending;
    if (msg.sequence) flags |= kHasSequence;
    out.push_back(flags);
    if (msg.info) pack_pair(out, msg.info->leader, static_cast<std::uint64_t>(msg.info->hopbound), width);
    if (msg.sequence) put_varint(out, *msg.sequence);
    if (!msg.pending.empty()) {
        put_varint(out, msg.pending.size());
        for (const auto& e : msg.pending) put_varint(out, pending_code(e));
    }
    return out;
}

AliveUnknown decode_unknown(std::span<const std::uint8_t> bytes)
{
    if (bytes.empty()) throw DecodeError("empty message");
    const std::uint8_t flags = bytes[0];
    std::size_t pos = 1;
    AliveUnknown m;
    const int width = flags & kWidthMask;
    if (flags & kHasLeader) {
        const std::size_t len = packed_bytes(width);
        if (width == 0 || bytes.size() < pos + len) throw DecodeError("truncated leader fields");
        const auto [leader, hb] = unpack_pair(bytes.subspan(pos, len), width);
        pos += len;
        if (leader < 1 || hb < 1) throw DecodeError("zero leader or hopbound");
        m.info = LeaderInfo{static_cast<ProcessId>(leader), static_cast<int>(hb)};
        if (unknown_width(*m.info) != width) throw DecodeError("non-canonical field width");
    } else if (width != 0) {
        throw DecodeError("width set without leader fields");
    }
    if (flags & kHasSequence) m.sequence = get_varint(bytes, pos);
    if (flags & kHasPending) {
        const auto count = get_varint(bytes, pos);
        if (count == 0) throw DecodeError("empty pending set flagged as present");
        if (count > bytes.size()) throw DecodeError("pending count exceeds message size");
        m.pending.reserve(count);
        for (std::uint64_t i = 0; i < count; ++i) {
            const auto code = get_varint(bytes, pos);
            PendingEntry e{(code & 1U) ? Label::kAck : Label::kNew, static_cast<ProcessId>(code >> 1)};
            if (e.id < 1 || (code >> 1) > 0xffffffffULL) throw DecodeError("bad pending id");
            if (!m.pending.empty() && !(m.pending.back() < e)) throw DecodeError("pending entries not sorted/unique");
            m.pending.push_back(e);
        }
    }
    if (pos != bytes.size()) throw DecodeError("trailing bytes");
    return m;
}

std::size_t encoded_size(const AliveKnown&, std::uint32_t n) { return known_size_bound(n); }

std::size_t encoded_size(const AliveUnknown& msg)
{
    std::size_t s = 1;
    if (msg.info) s += packed_bytes(unknown_width(*msg.info));
    if (msg.sequence) s += varint_size(*msg.sequence);
    if (!msg.pending.empty()) {
        s += varint_size(msg.pending.size());
        for (const auto& e : msg.pending) s += varint_size(pending_code(e));
    }
    return s;
}

std::size_t encoded_size(const Message& msg, std::uint32_t n)
{
    return std::visit(
        [n](const auto& m) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, AliveKnown>)
                return encoded_size(m, n);
            else
                return encoded_size(m);
        },
        msg);
}

std::optional<ProcessId> leader_field(const Message& msg)
{
    if (const auto* k = std::get_if<AliveKnown>(&msg)) return k->leader;
    const auto& u = std::get<AliveUnknown>(msg);
    if (u.info) return u.info->leader;
    return std::nullopt;
}

}  // namespace omega
