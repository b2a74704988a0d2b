#pragma once

#include <algorithm>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <sstream>
#include <utility>
#include <vector>

#include "bilever/core.hpp"

namespace bilever {

enum class TopologyKind {
    Complete,
    CompleteBipartite,
    Butterfly,
    BipartiteOfButterfly,
    Biregular,
    Explicit,
};

inline const char* to_string(TopologyKind k) {
    switch (k) {
        case TopologyKind::Complete: return "complete";
        case TopologyKind::CompleteBipartite: return "complete-bipartite";
        case TopologyKind::Butterfly: return "butterfly";
        case TopologyKind::BipartiteOfButterfly: return "bipartite-of-butterfly";
        case TopologyKind::Biregular: return "biregular";
        case TopologyKind::Explicit: return "explicit";
    }
    return "?";
}

/// Undirected graph with integer edge multiplicities. Butterfly-derived
/// graphs are multigraphs (parallel edges carry weight > 1); every other
/// builder yields a simple graph. Node ids are dense 0..n-1; when a
/// partition is present, side A occupies [0, n_a) and side B the rest.
class Topology {
public:
    TopologyKind kind = TopologyKind::Explicit;

    Topology() = default;
    Topology(TopologyKind k, int n, std::optional<int> n_a = std::nullopt)
        : kind(k), n_(n), n_a_(n_a), neighbors_(n), weights_(n) {
        if (n <= 0) throw ConfigError("topology needs at least one node");
        if (n_a && (*n_a <= 0 || *n_a >= n))
            throw ConfigError("partition sizes must be positive");
    }

    int node_count() const { return n_; }
    bool bipartite() const { return n_a_.has_value(); }
    int side_a_size() const { return checked_na(); }
    int side_b_size() const { return n_ - checked_na(); }
    Side side_of(NodeId v) const { return v < checked_na() ? Side::A : Side::B; }

    const std::vector<NodeId>& neighbors(NodeId v) const { return neighbors_[v]; }

    int weight(NodeId u, NodeId v) const {
        const auto& ns = neighbors_[u];
        auto it = std::lower_bound(ns.begin(), ns.end(), v);
        if (it == ns.end() || *it != v) return 0;
        return weights_[u][it - ns.begin()];
    }

    bool has_edge(NodeId u, NodeId v) const { return weight(u, v) > 0; }

    /// Number of edges counting multiplicity.
    long long edge_count() const { return total_weight_; }
    long long simple_edge_count() const { return distinct_edges_; }

    int degree(NodeId v) const {
        int d = 0;
        for (int w : weights_[v]) d += w;
        return d;
    }

    void add_edge(NodeId u, NodeId v, int multiplicity = 1) {
        if (u == v) throw ConfigError("self-loops are not allowed");
        if (u < 0 || v < 0 || u >= n_ || v >= n_)
            throw ConfigError("edge endpoint out of range");
        if (n_a_ && side_of(u) == side_of(v))
            throw ConfigError("edge does not cross the bipartition");
        insert_half(u, v, multiplicity);
        insert_half(v, u, multiplicity);
        total_weight_ += multiplicity;
    }

    /// Weighted side degrees when they are uniform per side; nullopt when the
    /// graph is not bipartite or not biregular.
    std::optional<std::pair<int, int>> biregular_degrees() const {
        if (!bipartite()) return std::nullopt;
        int d0 = degree(0), d1 = degree(*n_a_);
        for (NodeId v = 0; v < n_; ++v)
            if (degree(v) != (v < *n_a_ ? d0 : d1)) return std::nullopt;
        return std::make_pair(d0, d1);
    }

    bool connected() const {
        std::vector<char> seen(n_, 0);
        std::queue<NodeId> q;
        q.push(0);
        seen[0] = 1;
        int reached = 1;
        while (!q.empty()) {
            NodeId v = q.front();
            q.pop();
            for (NodeId w : neighbors_[v])
                if (!seen[w]) {
                    seen[w] = 1;
                    ++reached;
                    q.push(w);
                }
        }
        return reached == n_;
    }

private:
    int checked_na() const {
        if (!n_a_) throw ConfigError("topology has no bipartition");
        return *n_a_;
    }

    void insert_half(NodeId u, NodeId v, int multiplicity) {
        auto& ns = neighbors_[u];
        auto it = std::lower_bound(ns.begin(), ns.end(), v);
        if (it != ns.end() && *it == v) {
            weights_[u][it - ns.begin()] += multiplicity;
        } else {
            auto pos = it - ns.begin();
            ns.insert(it, v);
            weights_[u].insert(weights_[u].begin() + pos, multiplicity);
            if (u < v) ++distinct_edges_;
        }
    }

    int n_ = 0;
    std::optional<int> n_a_;
    std::vector<std::vector<NodeId>> neighbors_;
    std::vector<std::vector<int>> weights_;
    long long total_weight_ = 0;
    long long distinct_edges_ = 0;
};

inline Topology build_complete(int n) {
    Topology t(TopologyKind::Complete, n);
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v) t.add_edge(u, v);
    return t;
}

inline Topology build_complete_bipartite(int n_a, int n_b) {
    if (n_a < 1 || n_b < 1) throw ConfigError("both sides need at least one node");
    Topology t(TopologyKind::CompleteBipartite, n_a + n_b, n_a);
    for (NodeId u = 0; u < n_a; ++u)
        for (NodeId v = n_a; v < n_a + n_b; ++v) t.add_edge(u, v);
    return t;
}

/// Wrapped butterfly: r layers of s = 2^r nodes; v(i,j) connects straight to
/// v(i+1 mod r, j) and across to v(i+1 mod r, j xor 2^((i+1) mod r)). Node id
/// of v(i,j) is i*s + j. At r = 2 the straight edges between the two layers
/// coincide and carry multiplicity 2, keeping the graph 4-regular.
inline Topology build_butterfly(int r) {
    if (r < 2 || r % 2 != 0) throw ConfigError("butterfly order r must be even and >= 2");
    const long long s = 1LL << r;
    if (r * s > 1 << 20) throw ConfigError("butterfly too large");
    Topology t(TopologyKind::Butterfly, static_cast<int>(r * s));
    auto id = [s](int layer, long long j) { return static_cast<NodeId>(layer * s + j); };
    for (int i = 0; i < r; ++i) {
        int up = (i + 1) % r;
        for (long long j = 0; j < s; ++j) {
            t.add_edge(id(i, j), id(up, j));
            t.add_edge(id(i, j), id(up, j ^ (1LL << up)));
        }
    }
    return t;
}

struct ButterflySimulation {
    Topology graph;  // bipartite; side sizes 2^r, weighted degree 2r per side
    // simulates[b][j] lists the (layer, index) butterfly nodes carried by the
    // bipartite node of side b (0 = even layers) and column j.
    std::vector<std::vector<std::vector<std::pair<int, int>>>> simulates;
    int r = 0;
};

/// Collapse an r-butterfly onto a bipartite graph: even layers fold into side
/// 0, odd layers into side 1, preserving every butterfly edge (multiplicity
/// accumulates, e.g. the r straight edges of a column become one edge of
/// weight r). Each bipartite node simulates exactly r/2 butterfly nodes.
inline ButterflySimulation butterfly_to_bipartite(const Topology& butterfly) {
    if (butterfly.kind != TopologyKind::Butterfly)
        throw ConfigError("input is not a butterfly topology");
    int n = butterfly.node_count();
    int r = 0;
    while ((r + 1) * (1LL << (r + 1)) <= n) ++r;
    const long long s = 1LL << r;
    if (r * s != n || r % 2 != 0) throw ConfigError("malformed butterfly");

    ButterflySimulation sim;
    sim.r = r;
    sim.graph = Topology(TopologyKind::BipartiteOfButterfly, static_cast<int>(2 * s),
                         static_cast<int>(s));
    sim.simulates.assign(2, std::vector<std::vector<std::pair<int, int>>>(s));
    for (int i = 0; i < r; ++i)
        for (long long j = 0; j < s; ++j) sim.simulates[i % 2][j].push_back({i, static_cast<int>(j)});

    auto image = [&](NodeId v) {
        int layer = static_cast<int>(v / s);
        long long col = v % s;
        return static_cast<NodeId>((layer % 2) * s + col);
    };
    for (NodeId u = 0; u < n; ++u)
        for (NodeId w : butterfly.neighbors(u))
            if (u < w) sim.graph.add_edge(image(u), image(w), butterfly.weight(u, w));
    return sim;
}

/// Configuration-model (d0,d1)-biregular bipartite graph: match stubs at
/// random, reject multi-edges and disconnected outcomes, retry.
inline Topology build_biregular_random(int n0, int n1, int d0, int d1, std::uint64_t seed,
                                       int max_attempts = 4000) {
    if (n0 < 1 || n1 < 1 || d0 < 1 || d1 < 1) throw ConfigError("sides and degrees must be positive");
    if (d0 > n1 || d1 > n0) throw ConfigError("degree exceeds opposite side size");
    if (static_cast<long long>(n0) * d0 != static_cast<long long>(n1) * d1)
        throw ConfigError("stub counts differ: n0*d0 != n1*d1");
    SplitMix rng(mix64(seed, 0x6272ULL));
    const int stubs = n0 * d0;
    std::vector<int> right(stubs);
    for (int i = 0; i < stubs; ++i) right[i] = i / d1;  // side-1 node of each stub
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        for (int i = stubs - 1; i > 0; --i)
            std::swap(right[i], right[rng.next_below(i + 1)]);
        Topology t(TopologyKind::Biregular, n0 + n1, n0);
        bool simple = true;
        for (int i = 0; i < stubs && simple; ++i) {
            NodeId u = i / d0, v = n0 + right[i];
            if (t.has_edge(u, v)) simple = false;
            else t.add_edge(u, v);
        }
        if (simple && t.connected()) return t;
    }
    throw ConfigError("biregular sampling failed: no simple connected graph found");
}

/// Line format: header "graph n" or "bipartite nA nB", then one "u v" edge
/// per line; a repeated line raises the edge multiplicity.
inline Topology parse_topology(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw ParseError("empty topology stream");
    std::istringstream hs(header);
    std::string tag;
    hs >> tag;
    Topology t;
    if (tag == "graph") {
        int n;
        if (!(hs >> n)) throw ParseError("line 1: expected 'graph n'");
        t = Topology(TopologyKind::Explicit, n);
    } else if (tag == "bipartite") {
        int na, nb;
        if (!(hs >> na >> nb)) throw ParseError("line 1: expected 'bipartite nA nB'");
        t = Topology(TopologyKind::Explicit, na + nb, na);
    } else {
        throw ParseError("line 1: unknown header '" + tag + "'");
    }
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        NodeId u, v;
        if (!(ls >> u >> v))
            throw ParseError("line " + std::to_string(lineno) + ": expected 'u v'");
        try {
            t.add_edge(u, v);
        } catch (const ConfigError& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return t;
}

inline void format_topology(const Topology& t, std::ostream& out) {
    if (t.bipartite())
        out << "bipartite " << t.side_a_size() << ' ' << t.side_b_size() << '\n';
    else
        out << "graph " << t.node_count() << '\n';
    for (NodeId u = 0; u < t.node_count(); ++u)
        for (NodeId v : t.neighbors(u))
            if (u < v)
                for (int k = 0; k < t.weight(u, v); ++k) out << u << ' ' << v << '\n';
}

}  // namespace bilever
