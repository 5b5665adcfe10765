#include "omega/topology.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace omega {

namespace {

std::uint64_t edge_key(ProcessId from, ProcessId to) { return (static_cast<std::uint64_t>(from) << 32) | to; }

bool in_scope(const ProcessSet& restrict_to, ProcessId p) { return restrict_to.empty() || restrict_to.contains(p); }

}  // namespace

Digraph::Digraph(std::uint32_t n) : n_(n), out_(n + 1), in_(n + 1) {}

std::size_t Digraph::add_edge(ProcessId from, ProcessId to, std::optional<ChannelConfig> channel)
{
    if (from < 1 || from > n_ || to < 1 || to > n_)
        throw TopologyError("edge " + std::to_string(from) + "->" + std::to_string(to) + " outside 1.." +
                            std::to_string(n_));
    if (from == to) throw TopologyError("self loop on process " + std::to_string(from));
    if (index_.contains(edge_key(from, to)))
        throw TopologyError("duplicate edge " + std::to_string(from) + "->" + std::to_string(to));
    const std::size_t idx = edges_.size();
    edges_.push_back(DirectedEdge{from, to, std::move(channel)});
    index_.emplace(edge_key(from, to), idx);
    auto by_to = [this](std::size_t a, std::size_t b) { return edges_[a].to < edges_[b].to; };
    auto by_from = [this](std::size_t a, std::size_t b) { return edges_[a].from < edges_[b].from; };
    auto& out = out_[from];
    out.insert(std::upper_bound(out.begin(), out.end(), idx, by_to), idx);
    auto& in = in_[to];
    in.insert(std::upper_bound(in.begin(), in.end(), idx, by_from), idx);
    return idx;
}

void Digraph::add_bidirectional(ProcessId a, ProcessId b, std::optional<ChannelConfig> channel)
{
    add_edge(a, b, channel);
    add_edge(b, a, std::move(channel));
}

void Digraph::set_channel(std::size_t index, std::optional<ChannelConfig> channel)
{
    edges_.at(index).channel = std::move(channel);
}

std::optional<std::size_t> Digraph::find_edge(ProcessId from, ProcessId to) const
{
    const auto it = index_.find(edge_key(from, to));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::vector<ProcessId> Digraph::out_neighbors(ProcessId p) const
{
    std::vector<ProcessId> out;
    for (auto e : out_.at(p)) out.push_back(edges_[e].to);
    return out;
}

std::vector<ProcessId> Digraph::in_neighbors(ProcessId p) const
{
    std::vector<ProcessId> in;
    for (auto e : in_.at(p)) in.push_back(edges_[e].from);
    return in;
}

bool Digraph::is_bidirectional() const
{
    return std::all_of(edges_.begin(), edges_.end(), [this](const DirectedEdge& e) { return has_edge(e.to, e.from); });
}

ProcessSet all_processes(std::uint32_t n)
{
    ProcessSet s;
    for (ProcessId p = 1; p <= n; ++p) s.insert(s.end(), p);
    return s;
}

Digraph build_ring(std::uint32_t n)
{
    if (n < 2) throw TopologyError("ring needs n >= 2");
    Digraph g(n);
    if (n == 2) {
        g.add_bidirectional(1, 2);
        return g;
    }
    for (ProcessId p = 1; p <= n; ++p) g.add_bidirectional(p, p % n + 1);
    return g;
}

Digraph build_complete(std::uint32_t n)
{
    if (n < 1) throw TopologyError("complete graph needs n >= 1");
    Digraph g(n);
    for (ProcessId a = 1; a <= n; ++a)
        for (ProcessId b = a + 1; b <= n; ++b) g.add_bidirectional(a, b);
    return g;
}

Digraph build_regular(std::uint32_t n, std::uint32_t k, std::uint64_t seed)
{
    if (k >= n) throw TopologyError("regular graph needs k < n");
    if ((static_cast<std::uint64_t>(n) * k) % 2 != 0) throw TopologyError("regular graph needs n*k even");
    if (k == 0 && n > 1) throw TopologyError("0-regular graph on more than one vertex is disconnected");
    constexpr int kMaxAttempts = 100000;
    std::vector<ProcessId> stubs;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        std::mt19937_64 rng(splitmix64(seed + static_cast<std::uint64_t>(attempt) * 0x632be59bd9b4e019ULL));
        stubs.clear();
        for (ProcessId p = 1; p <= n; ++p)
            for (std::uint32_t i = 0; i < k; ++i) stubs.push_back(p);
        std::shuffle(stubs.begin(), stubs.end(), rng);
        Digraph g(n);
        bool simple = true;
        for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
            const ProcessId a = stubs[i], b = stubs[i + 1];
            if (a == b || g.has_edge(a, b)) {
                simple = false;
                break;
            }
            g.add_bidirectional(a, b);
        }
        if (simple && strongly_connected(g)) return g;
    }
    throw TopologyError("no connected simple regular graph found");
}

Digraph build_random_connected(std::uint32_t n, std::uint32_t extra_edges, std::uint64_t seed)
{
    if (n < 1) throw TopologyError("graph needs n >= 1");
    const std::uint64_t max_edges = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    if (n - 1 + static_cast<std::uint64_t>(extra_edges) > max_edges) throw TopologyError("too many extra edges");
    std::mt19937_64 rng(splitmix64(seed));
    std::vector<ProcessId> order(n);
    std::iota(order.begin(), order.end(), 1U);
    std::shuffle(order.begin(), order.end(), rng);
    Digraph g(n);
    for (std::uint32_t i = 1; i < n; ++i) {
        const auto parent = order[std::uniform_int_distribution<std::uint32_t>(0, i - 1)(rng)];
        g.add_bidirectional(order[i], parent);
    }
    std::uniform_int_distribution<ProcessId> pick(1, n);
    for (std::uint32_t added = 0; added < extra_edges;) {
        const ProcessId a = pick(rng), b = pick(rng);
        if (a == b || g.has_edge(a, b)) continue;
        g.add_bidirectional(a, b);
        ++added;
    }
    return g;
}

Digraph load_edge_list(std::istream& in, const ChannelConfig& base, std::optional<std::uint32_t> n)
{
    struct Line {
        ProcessId u, v;
        bool directed;
        std::optional<ChannelConfig> channel;
    };
    std::vector<Line> lines;
    std::uint32_t max_id = 0;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        const auto where = " at line " + std::to_string(lineno);
        bool directed = false;
        if (tok.size() >= 3 && tok[1] == ">") {
            directed = true;
            tok.erase(tok.begin() + 1);
        }
        if (tok.size() != 2 && tok.size() != 6) throw TopologyError("expected `u v [K D stabilization p]`" + where);
        Line l{};
        l.directed = directed;
        try {
            const long u = std::stol(tok[0]);
            const long v = std::stol(tok[1]);
            if (u < 1 || v < 1) throw TopologyError("ids are 1-indexed" + where);
            l.u = static_cast<ProcessId>(u);
            l.v = static_cast<ProcessId>(v);
            if (tok.size() == 6) {
                ChannelConfig c = base;
                c.add.K = std::stoi(tok[2]);
                c.add.D = std::stoll(tok[3]);
                c.add.stabilization = std::stoll(tok[4]);
                c.drop_probability = std::stod(tok[5]);
                l.channel = c;
            }
        } catch (const std::logic_error& e) {
            if (dynamic_cast<const TopologyError*>(&e)) throw;
            throw TopologyError("malformed number" + where);
        }
        max_id = std::max({max_id, l.u, l.v});
        lines.push_back(std::move(l));
    }
    const std::uint32_t count = n.value_or(max_id);
    if (max_id > count) throw TopologyError("edge list mentions id " + std::to_string(max_id) + " > n");
    Digraph g(count);
    for (auto& l : lines) {
        if (l.directed) {
            if (auto e = g.find_edge(l.u, l.v))
                g.set_channel(*e, l.channel);
            else
                g.add_edge(l.u, l.v, l.channel);
        } else {
            g.add_bidirectional(l.u, l.v, l.channel);
        }
    }
    return g;
}

Digraph load_edge_list_file(const std::string& path, const ChannelConfig& base, std::optional<std::uint32_t> n)
{
    std::ifstream f(path);
    if (!f) throw TopologyError("cannot open edge list '" + path + "'");
    return load_edge_list(f, base, n);
}

std::set<std::size_t> eventual_add_edges(const Digraph& g, const ChannelConfig& base)
{
    std::set<std::size_t> out;
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        const auto& ch = g.edge(e).channel;
        if (satisfies_eventual_add(ch ? *ch : base)) out.insert(out.end(), e);
    }
    return out;
}

bool validate_span_tree(const Digraph& g, const std::set<std::size_t>& add_edges, const ProcessSet& correct)
{
    if (correct.empty()) throw std::invalid_argument("validate_span_tree: correct set must be nonempty");
    const ProcessId root = *correct.begin();
    std::vector<char> seen(g.n() + 1, 0);
    std::deque<ProcessId> frontier{root};
    seen[root] = 1;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        const ProcessId p = frontier.front();
        frontier.pop_front();
        for (auto e : g.out_edges(p)) {
            const ProcessId q = g.edge(e).to;
            if (seen[q] || !correct.contains(q) || !add_edges.contains(e)) continue;
            seen[q] = 1;
            ++reached;
            frontier.push_back(q);
        }
    }
    return reached == correct.size();
}

std::vector<int> bfs_distances(const Digraph& g, ProcessId source, const ProcessSet& restrict_to)
{
    std::vector<int> dist(g.n() + 1, -1);
    if (!in_scope(restrict_to, source)) return dist;
    std::deque<ProcessId> frontier{source};
    dist[source] = 0;
    while (!frontier.empty()) {
        const ProcessId p = frontier.front();
        frontier.pop_front();
        for (auto e : g.out_edges(p)) {
            const ProcessId q = g.edge(e).to;
            if (dist[q] >= 0 || !in_scope(restrict_to, q)) continue;
            dist[q] = dist[p] + 1;
            frontier.push_back(q);
        }
    }
    return dist;
}

int diameter(const Digraph& g, const ProcessSet& restrict_to)
{
    const ProcessSet scope = restrict_to.empty() ? all_processes(g.n()) : restrict_to;
    int best = 0;
    for (ProcessId s : scope) {
        const auto dist = bfs_distances(g, s, scope);
        for (ProcessId t : scope) {
            if (dist[t] < 0)
                throw TopologyError("subgraph disconnected: " + std::to_string(t) + " unreachable from " +
                                    std::to_string(s));
            best = std::max(best, dist[t]);
        }
    }
    return best;
}

bool strongly_connected(const Digraph& g, const ProcessSet& restrict_to)
{
    const ProcessSet scope = restrict_to.empty() ? all_processes(g.n()) : restrict_to;
    if (scope.empty()) return true;
    const ProcessId root = *scope.begin();
    auto sweep = [&](bool forward) {
        std::vector<char> seen(g.n() + 1, 0);
        std::deque<ProcessId> frontier{root};
        seen[root] = 1;
        std::size_t reached = 1;
        while (!frontier.empty()) {
            const ProcessId p = frontier.front();
            frontier.pop_front();
            for (auto e : forward ? g.out_edges(p) : g.in_edges(p)) {
                const ProcessId q = forward ? g.edge(e).to : g.edge(e).from;
                if (seen[q] || !scope.contains(q)) continue;
                seen[q] = 1;
                ++reached;
                frontier.push_back(q);
            }
        }
        return reached == scope.size();
    };
    return sweep(true) && sweep(false);
}

}  // namespace omega
