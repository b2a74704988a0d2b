#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bilever/simulator.hpp"

namespace bilever {

struct VerdictWitness {
    int round = -1;
    NodeId node = -1;
    GeneralId general = -1;
    std::string note;
};

struct PropertyVerdict {
    std::string property;
    bool holds = true;
    std::optional<VerdictWitness> witness;
};

inline std::vector<NodeId> correct_nodes(const Trace& trace) {
    std::vector<char> faulty(trace.spec.config.node_count(), 0);
    for (NodeId v : trace.spec.corruption.t_a) faulty[v] = 1;
    for (NodeId v : trace.spec.corruption.t_b) faulty[v] = 1;
    std::vector<NodeId> out;
    for (NodeId v = 0; v < trace.spec.config.node_count(); ++v)
        if (!faulty[v]) out.push_back(v);
    return out;
}

/// Initial value shared by all correct initiators, when they agree.
inline std::optional<Bit> uniform_init(const Trace& trace) {
    std::vector<char> faulty(trace.spec.config.node_count(), 0);
    for (NodeId v : trace.spec.corruption.t_a) faulty[v] = 1;
    std::optional<Bit> u;
    for (NodeId i = 0; i < static_cast<int>(trace.spec.init_values.size()); ++i) {
        if (faulty[i]) continue;
        Bit v = trace.spec.init_values[i];
        if (!u) u = v;
        else if (*u != v) return std::nullopt;
    }
    return u;
}

namespace detail {
inline std::map<std::pair<NodeId, GeneralId>, int> first_accepts(const Trace& trace) {
    std::map<std::pair<NodeId, GeneralId>, int> first;
    for (const auto& a : trace.accepts) {
        auto key = std::make_pair(a.node, a.general);
        auto it = first.find(key);
        if (it == first.end() || a.round < it->second) first[key] = a.round;
    }
    return first;
}
}  // namespace detail

/// Step-response check for the initiated General: a uniform 1 must be
/// accepted by every node of P within k_H rounds of round 0, a uniform 0
/// never; mixed initializations are outside the premise. The trace should
/// have settled (quiesced or run past the cascade) for "never" to be
/// meaningful.
inline PropertyVerdict verdict_heaviside(const Trace& trace, int k_h,
                                         const std::vector<NodeId>& eval_set) {
    if (trace.spec.init_values.empty())
        throw ConfigError("trace lacks initialization metadata");
    PropertyVerdict v{"heaviside", true, std::nullopt};
    auto u = uniform_init(trace);
    if (!u) return v;
    auto first = detail::first_accepts(trace);
    const GeneralId g0 = trace.spec.general0;
    for (NodeId node : eval_set) {
        auto it = first.find({node, g0});
        if (*u == 1) {
            if (it == first.end() || it->second >= k_h) {
                v.holds = false;
                v.witness = {it == first.end() ? -1 : it->second, node, g0,
                             "unanimous 1 not accepted within k_H"};
                return v;
            }
        } else if (it != first.end()) {
            v.holds = false;
            v.witness = {it->second, node, g0, "accept despite all-zero input"};
            return v;
        }
    }
    return v;
}

/// Accept rounds of every General must span at most k_delta across the
/// evaluation set; a General nobody accepted passes trivially, a General
/// only some accepted fails.
inline PropertyVerdict verdict_dirac(const Trace& trace, int k_delta,
                                     const std::vector<NodeId>& eval_set) {
    PropertyVerdict v{"dirac", true, std::nullopt};
    auto first = detail::first_accepts(trace);
    const int m = trace.spec.protocol == Protocol::BaLever ? trace.spec.config.n_b
                                                           : trace.spec.generals;
    for (GeneralId g = 0; g < m; ++g) {
        int lo = INT32_MAX, hi = -1;
        for (NodeId node : eval_set) {
            auto it = first.find({node, g});
            if (it != first.end()) {
                lo = std::min(lo, it->second);
                hi = std::max(hi, it->second);
            }
        }
        if (hi < 0) continue;
        if (hi - lo > k_delta) {
            v.holds = false;
            v.witness = {hi, -1, g, "accept spread exceeds k_delta"};
            return v;
        }
        for (NodeId node : eval_set)
            if (!first.count({node, g})) {
                v.holds = false;
                v.witness = {-1, node, g, "node never accepted while others did"};
                return v;
            }
    }
    return v;
}

/// Every eval node agrees exactly once, at k_f, on one common value.
inline PropertyVerdict verdict_agreement(const Trace& trace,
                                         const std::vector<NodeId>& eval_set) {
    PropertyVerdict v{"agreement", true, std::nullopt};
    std::map<NodeId, std::pair<int, Bit>> agreed;  // node -> (count, value)
    for (const auto& a : trace.agrees) {
        auto& slot = agreed[a.node];
        if (slot.first == 0) slot = {1, a.value};
        else ++slot.first;
        if (a.round != trace.k_f()) {
            v.holds = false;
            v.witness = {a.round, a.node, a.general, "agree outside k_f"};
            return v;
        }
    }
    std::optional<Bit> value;
    for (NodeId node : eval_set) {
        auto it = agreed.find(node);
        if (it == agreed.end() || it->second.first != 1) {
            v.holds = false;
            v.witness = {-1, node, -1, "missing or duplicated agree event"};
            return v;
        }
        if (!value) value = it->second.second;
        else if (*value != it->second.second) {
            v.holds = false;
            v.witness = {trace.k_f(), node, -1, "agree values differ"};
            return v;
        }
    }
    return v;
}

/// Under a consistent initialization every eval node must finalize that value.
inline PropertyVerdict verdict_validity(const Trace& trace,
                                        const std::vector<NodeId>& eval_set) {
    PropertyVerdict v{"validity", true, std::nullopt};
    auto u = uniform_init(trace);
    if (!u) return v;
    std::map<NodeId, Bit> z;
    for (const auto& a : trace.agrees) z[a.node] = a.value;
    for (NodeId node : eval_set) {
        auto it = z.find(node);
        if (it == z.end() || it->second != *u) {
            v.holds = false;
            v.witness = {trace.k_f(), node, -1, "final decision differs from the uniform input"};
            return v;
        }
    }
    return v;
}

/// Round-wise invariant of the agreement layer: the correct decisions are
/// unanimous, or more faulty nodes than the round index have already
/// revealed themselves (first_deviation <= k).
inline PropertyVerdict verdict_invariant_i(const Trace& trace) {
    if (trace.spec.protocol != Protocol::BaLever)
        throw ConfigError("invariant-I applies to agreement traces");
    PropertyVerdict v{"invariant-I", true, std::nullopt};
    auto correct = correct_nodes(trace);
    for (const auto& snap : trace.snapshots) {
        bool all0 = true, all1 = true;
        for (NodeId node : correct) {
            if (snap.s[node]) all0 = false;
            else all1 = false;
        }
        if (all0 || all1) continue;
        int f_k = 0;
        for (int d : trace.first_deviation)
            if (d >= 0 && d <= snap.round) ++f_k;
        if (f_k <= snap.round) {
            v.holds = false;
            v.witness = {snap.round, -1, -1,
                         "mixed decisions with f_k = " + std::to_string(f_k)};
            return v;
        }
    }
    return v;
}

struct TrafficStats {
    long long messages = 0;
    long long adv_messages = 0;
    long long bits = 0;
    long long adv_bits = 0;
    long long bound_bits = 0;
    bool within_bound = false;
};

/// Identifier bits per message: ceil(log2 m) for m > 1, one bit otherwise.
inline int bits_per_message(int m) {
    if (m <= 1) return 1;
    int bits = 0;
    while ((1 << bits) < m) ++bits;
    return bits;
}

/// Protocol traffic (correct senders only) against the per-protocol budget;
/// adversary traffic is reported alongside but not charged.
inline TrafficStats traffic_stats(const Trace& trace) {
    const auto& cfg = trace.spec.config;
    const int m = trace.spec.protocol == Protocol::BaLever ? cfg.n_b : trace.spec.generals;
    const int bpm = bits_per_message(m);
    TrafficStats t;
    t.messages = trace.metrics.messages;
    t.adv_messages = trace.metrics.adv_messages;
    t.bits = t.messages * bpm;
    t.adv_bits = t.adv_messages * bpm;
    switch (trace.spec.protocol) {
        case Protocol::BiBroadcast:
            t.bound_bits = 2LL * cfg.n_a * cfg.n_b * bpm;
            break;
        case Protocol::BaLever:
            t.bound_bits = 2LL * cfg.n_a * cfg.n_b * cfg.n_b * bpm;
            break;
        case Protocol::BroadcastKn:
            t.bound_bits = 2LL * cfg.n_a * (cfg.n_a - 1) * bpm;
            break;
    }
    t.within_bound = t.bits <= t.bound_bits;
    return t;
}

struct CoverageInput {
    int n_a = 0, n_b = 0;
    int f_a = 0, f_b = 0;
    double p = 0.0;  // componential failure rate per hour
};

struct CoverageResult {
    double exact_lower = 0.0;                 // 1 - exact binomial tails
    std::optional<double> closed_form;        // geometric-majorant form; needs e*p*n < 1
    double tail_exact_a = 0.0, tail_exact_b = 0.0;
    double tail_bound_a = 0.0, tail_bound_b = 0.0;
};

namespace detail {
/// P[X > f] for X ~ Binomial(n, p), summed directly in extended precision.
inline long double binomial_tail(int n, int f, long double p) {
    // term for i = f+1, then multiply by ((n-i)/(i+1)) * (p/(1-p)) stepwise
    long double q = 1.0L - p;
    long double log_term = 0.0L;
    for (int i = 0; i < f + 1; ++i) log_term += std::log((long double)(n - i) / (i + 1));
    log_term += (f + 1) * std::log(p) + (n - f - 1) * std::log(q);
    long double term = std::exp(log_term);
    long double sum = 0.0L;
    for (int i = f + 1; i <= n; ++i) {
        sum += term;
        term *= (long double)(n - i) / (i + 1) * (p / q);
    }
    return sum;
}

inline std::optional<long double> tail_majorant(int n, int f, long double p) {
    const long double e = std::exp(1.0L);
    const long double pi = 3.141592653589793238462643383279502884L;
    long double epn = e * p * n;
    if (epn >= 1.0L) return std::nullopt;
    long double head = std::sqrt(1.0L / (2.0L * pi * (f + 1)));
    return head * std::pow(epn / (f + 1), f + 1) / (1.0L - epn);
}
}  // namespace detail

/// Lower bound on the probability that the per-side fault budgets hold under
/// independent failures. The exact form sums the binomial tails; the closed
/// form majorizes each tail term by Stirling, so it never exceeds the exact
/// bound.
inline CoverageResult coverage_lower_bound(const CoverageInput& in) {
    if (!(in.p > 0.0 && in.p < 1.0)) throw ConfigError("failure rate p must lie in (0,1)");
    if (in.f_a < 0 || in.f_b < 0 || in.f_a > in.n_a || in.f_b > in.n_b)
        throw ConfigError("budgets must satisfy 0 <= f <= n");
    CoverageResult r;
    long double ta = detail::binomial_tail(in.n_a, in.f_a, in.p);
    long double tb = detail::binomial_tail(in.n_b, in.f_b, in.p);
    r.tail_exact_a = double(ta);
    r.tail_exact_b = double(tb);
    r.exact_lower = double(1.0L - ta - tb);
    auto ba = detail::tail_majorant(in.n_a, in.f_a, in.p);
    auto bb = detail::tail_majorant(in.n_b, in.f_b, in.p);
    if (ba && bb) {
        r.tail_bound_a = double(*ba);
        r.tail_bound_b = double(*bb);
        r.closed_form = double(1.0L - *ba - *bb);
    }
    return r;
}

}  // namespace bilever
