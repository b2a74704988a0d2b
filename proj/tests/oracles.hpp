// Independent reference implementations used only by tests. These stay
// deliberately naive (full re-scans, direct sums) so they share no code path
// with the library implementations they check.
#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "bilever/npc.hpp"
#include "bilever/topology.hpp"

namespace oracle {

struct NaiveNpc {
    std::set<bilever::NodeId> p0, p1, z0, z1;
};

/// Textbook fixpoint: recompute the elimination sets from scratch until
/// nothing changes.
inline NaiveNpc naive_npc(const bilever::Topology& g, bilever::Ratio beta0,
                          bilever::Ratio beta1, const std::vector<bilever::NodeId>& t0,
                          const std::vector<bilever::NodeId>& t1) {
    using bilever::NodeId;
    const int n0 = g.side_a_size();
    const int n = g.node_count();
    auto degs = g.biregular_degrees();
    const long long d0 = degs->first, d1 = degs->second;

    std::set<NodeId> st0(t0.begin(), t0.end()), st1(t1.begin(), t1.end());
    std::set<NodeId> z0, z1;
    while (true) {
        std::set<NodeId> nz0, nz1;
        for (NodeId j = 0; j < n0; ++j) {
            long long count = 0;
            for (NodeId w : g.neighbors(j))
                if (st1.count(w) || z1.count(w)) count += g.weight(j, w);
            if (count * beta0.den >= beta0.num * d0) nz0.insert(j);
        }
        for (NodeId j = n0; j < n; ++j) {
            long long count = 0;
            for (NodeId w : g.neighbors(j))
                if (st0.count(w) || z0.count(w)) count += g.weight(j, w);
            if (count * beta1.den >= beta1.num * d1) nz1.insert(j);
        }
        if (std::includes(z0.begin(), z0.end(), nz0.begin(), nz0.end()) &&
            std::includes(z1.begin(), z1.end(), nz1.begin(), nz1.end()))
            break;
        z0.insert(nz0.begin(), nz0.end());
        z1.insert(nz1.begin(), nz1.end());
    }
    NaiveNpc r;
    for (NodeId v = 0; v < n0; ++v)
        if (!st0.count(v)) (z0.count(v) ? r.z0 : r.p0).insert(v);
    for (NodeId v = n0; v < n; ++v)
        if (!st1.count(v)) (z1.count(v) ? r.z1 : r.p1).insert(v);
    return r;
}

inline bool matches(const NaiveNpc& a, const bilever::NpcResult& b) {
    auto eq = [](const std::set<bilever::NodeId>& s, const std::vector<bilever::NodeId>& v) {
        return std::set<bilever::NodeId>(v.begin(), v.end()) == s;
    };
    return eq(a.p0, b.p0) && eq(a.p1, b.p1) && eq(a.z0, b.z0) && eq(a.z1, b.z1);
}

/// Direct enumeration of cross edges, weights included.
inline long long count_cross_edges(const bilever::Topology& g,
                                   const std::vector<bilever::NodeId>& s0,
                                   const std::vector<bilever::NodeId>& s1) {
    long long e = 0;
    for (bilever::NodeId u : s0)
        for (bilever::NodeId v : s1) e += g.weight(u, v);
    return e;
}

}  // namespace oracle
