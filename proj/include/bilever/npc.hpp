#pragma once

#include <vector>

#include "bilever/topology.hpp"

namespace bilever {

/// Outcome of the poor-node elimination fixpoint. P_i, Z_i and T_i partition
/// side i: P holds the surviving (non-poor correct) nodes, Z the eliminated
/// correct nodes, T the faulty input set.
struct NpcResult {
    std::vector<NodeId> p0, p1;
    std::vector<NodeId> z0, z1;
    Ratio beta0, beta1;
    int d0 = 0, d1 = 0;
};

/// Iterated elimination: a node falls when the weighted count of its fallen
/// or faulty neighbours reaches beta_i * d_i (compared exactly in integers).
/// The update is monotone, so the least fixpoint is iteration-order free;
/// this implementation uses a worklist over affected nodes.
inline NpcResult npc_sets(const Topology& g, Ratio beta0, Ratio beta1,
                          const std::vector<NodeId>& t0, const std::vector<NodeId>& t1) {
    if (!g.bipartite()) throw ConfigError("npc needs a bipartite graph");
    auto degs = g.biregular_degrees();
    if (!degs) throw ConfigError("npc needs well-defined per-side degrees (biregular)");
    for (Ratio b : {beta0, beta1})
        if (!(b.num > 0 && b.num < b.den)) throw ConfigError("beta must lie in (0,1)");

    const int n0 = g.side_a_size();
    const int n = g.node_count();
    const long long d0 = degs->first, d1 = degs->second;

    std::vector<char> faulty(n, 0), fallen(n, 0);
    for (NodeId v : t0) {
        if (v < 0 || v >= n0) throw ConfigError("T0 must lie in side 0");
        faulty[v] = 1;
    }
    for (NodeId v : t1) {
        if (v < n0 || v >= n) throw ConfigError("T1 must lie in side 1");
        faulty[v] = 1;
    }

    // count of eliminated-or-faulty opposite neighbours, edge weights included
    std::vector<long long> count(n, 0);
    auto over_threshold = [&](NodeId v) {
        return v < n0 ? beta0.reached_by(count[v], d0) : beta1.reached_by(count[v], d1);
    };

    std::vector<NodeId> work;
    auto bump_neighbors = [&](NodeId v) {
        for (NodeId w : g.neighbors(v)) {
            count[w] += g.weight(v, w);
            if (!fallen[w] && !faulty[w] && over_threshold(w)) {
                fallen[w] = 1;
                work.push_back(w);
            }
        }
    };
    for (NodeId v = 0; v < n; ++v)
        if (faulty[v]) bump_neighbors(v);
    while (!work.empty()) {
        NodeId v = work.back();
        work.pop_back();
        bump_neighbors(v);
    }

    NpcResult r;
    r.beta0 = beta0;
    r.beta1 = beta1;
    r.d0 = static_cast<int>(d0);
    r.d1 = static_cast<int>(d1);
    for (NodeId v = 0; v < n; ++v) {
        if (faulty[v]) continue;
        auto& bucket = fallen[v] ? (v < n0 ? r.z0 : r.z1) : (v < n0 ? r.p0 : r.p1);
        bucket.push_back(v);
    }
    return r;
}

/// Quota check for incomplete systems: the surviving set must cover at least
/// (1 - mu*alpha) * n nodes.
inline bool poor_node_quota(const NpcResult& npc, double mu, double alpha, int n) {
    return double(npc.p0.size() + npc.p1.size()) >= (1.0 - mu * alpha) * n;
}

}  // namespace bilever
