#pragma once

#include "omega/channel.hpp"
#include "omega/types.hpp"

#include <cstdint>
#include <istream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace omega {

class TopologyError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct DirectedEdge {
    ProcessId from = 0;
    ProcessId to = 0;
    std::optional<ChannelConfig> channel;  // overrides the scenario-wide channel
};

// Static communication graph over processes 1..n. Edge indices are stable
// in insertion order; adjacency lists are sorted by neighbour id.
class Digraph {
public:
    Digraph() = default;
    explicit Digraph(std::uint32_t n);

    std::uint32_t n() const { return n_; }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<DirectedEdge>& edges() const { return edges_; }
    const DirectedEdge& edge(std::size_t index) const { return edges_.at(index); }

    // Adds from -> to. Rejects self loops, duplicates and ids outside 1..n.
    std::size_t add_edge(ProcessId from, ProcessId to, std::optional<ChannelConfig> channel = {});
    // Adds both directions, each with the same override.
    void add_bidirectional(ProcessId a, ProcessId b, std::optional<ChannelConfig> channel = {});
    void set_channel(std::size_t index, std::optional<ChannelConfig> channel);

    std::optional<std::size_t> find_edge(ProcessId from, ProcessId to) const;
    bool has_edge(ProcessId from, ProcessId to) const { return find_edge(from, to).has_value(); }

    // Edge indices, sorted by the neighbour at the other end.
    const std::vector<std::size_t>& out_edges(ProcessId p) const { return out_.at(p); }
    const std::vector<std::size_t>& in_edges(ProcessId p) const { return in_.at(p); }
    std::vector<ProcessId> out_neighbors(ProcessId p) const;
    std::vector<ProcessId> in_neighbors(ProcessId p) const;

    // Every edge has its reverse.
    bool is_bidirectional() const;

private:
    std::uint32_t n_ = 0;
    std::vector<DirectedEdge> edges_;
    std::vector<std::vector<std::size_t>> out_;
    std::vector<std::vector<std::size_t>> in_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

using ProcessSet = std::set<ProcessId>;

Digraph build_ring(std::uint32_t n);

// Connected simple k-regular graph drawn with the pairing model. Rejects
// draws with self loops, parallel edges or more than one component, and
// retries with a perturbed seed.
Digraph build_regular(std::uint32_t n, std::uint32_t k, std::uint64_t seed);

// Random spanning tree plus `extra_edges` distinct random chords.
Digraph build_random_connected(std::uint32_t n, std::uint32_t extra_edges, std::uint64_t seed);

Digraph build_complete(std::uint32_t n);

// Edge-list text: one undirected edge per line, `u v [K D stabilization p]`,
// or a single direction with `u > v [K D stabilization p]` (adds the edge,
// or overrides that direction of an existing one). `#` starts a comment.
// Ids are 1-indexed; n is the largest id mentioned unless given.
Digraph load_edge_list(std::istream& in, const ChannelConfig& base, std::optional<std::uint32_t> n = {});
Digraph load_edge_list_file(const std::string& path, const ChannelConfig& base, std::optional<std::uint32_t> n = {});

// True iff a directed spanning tree rooted at min(correct) exists using only
// `add_edges` and covering exactly the correct processes.
bool validate_span_tree(const Digraph& g, const std::set<std::size_t>& add_edges, const ProcessSet& correct);

// Edge indices whose channel (override or `base`) is eventually ADD.
std::set<std::size_t> eventual_add_edges(const Digraph& g, const ChannelConfig& base);

// Hop distances from `source` over edges with both endpoints in `restrict_to`
// (all processes when empty). Unreachable entries are -1. Index 0 unused.
std::vector<int> bfs_distances(const Digraph& g, ProcessId source, const ProcessSet& restrict_to = {});

// Longest shortest directed path among `restrict_to` (all processes when
// empty). Throws TopologyError when some pair is unreachable.
int diameter(const Digraph& g, const ProcessSet& restrict_to = {});

// Every process of `restrict_to` reaches every other one.
bool strongly_connected(const Digraph& g, const ProcessSet& restrict_to = {});

ProcessSet all_processes(std::uint32_t n);

}  // namespace omega
