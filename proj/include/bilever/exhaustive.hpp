#pragma once

#include <atomic>
#include <cstring>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

#include "bilever/analysis.hpp"
#include "bilever/simulator.hpp"

namespace bilever {

/// Bitmask re-implementation of the bipartite protocols for exhaustive
/// adversary enumeration. One adversary choice per round: a delivery mask of
/// 1-bits per faulty node (applied to every General), which is exactly the
/// single-General script space; per-General adversaries are covered by the
/// generic simulator on sampled scripts. Sides and General counts are capped
/// at 16 nodes.
class FastEngine {
public:
    static constexpr int kMax = 8;

    struct Instance {
        Protocol protocol = Protocol::BiBroadcast;  // or BaLever
        BroadcastConfig config;
        GeneralId g0 = 0;
        int horizon = 3;               // scripted rounds
        int debug_accept_slack = 0;
    };

    struct State {
        std::uint32_t est_a[kMax][kMax];  // [A node][general]: mask over B senders
        std::uint32_t est_b[kMax][kMax];  // [B node][general]: mask over A senders
        std::uint32_t x_a[kMax], b_a[kMax], x_b[kMax], b_b[kMax];  // per general
        std::uint32_t pending_a[kMax];    // per general: relays queued for next round
        std::int8_t acc_a[kMax][kMax], acc_b[kMax][kMax];  // [general][node] first accept
        std::uint32_t accgen_a[kMax], accgen_b[kMax];      // per node: accepted generals
        std::uint32_t r_a[kMax];          // per B node: round-0 nominal-General ones
        std::uint32_t s_a = 0, s_b = 0, z_a = 0, z_b = 0;
        bool agreed = false;
        long long msgs = 0;
        int round = 0;
    };

    FastEngine(const Instance& inst, std::uint32_t t_a, std::uint32_t t_b,
               std::uint32_t init_ones)
        : inst_(inst), cfg_(inst.config) {
        if (!cfg_.is_bipartite) throw ConfigError("fast engine is bipartite only");
        n_a_ = cfg_.n_a;
        n_b_ = cfg_.n_b;
        if (n_a_ > kMax || n_b_ > kMax) throw ConfigError("instance too large for the fast engine");
        m_ = inst.protocol == Protocol::BaLever ? n_b_ : 1;
        fa_mask_ = t_a;
        fb_mask_ = t_b;
        correct_a_ = ~t_a & low_bits(n_a_);
        correct_b_ = ~t_b & low_bits(n_b_);
        init_ones_ = init_ones & correct_a_;
        relay_a_ = cfg_.relay_threshold(Side::A);
        accept_a_ = cfg_.accept_threshold(Side::A) - inst.debug_accept_slack;
        relay_b_ = cfg_.relay_threshold(Side::B);
        accept_b_ = cfg_.accept_threshold(Side::B) - inst.debug_accept_slack;
        for (int i = 0; i < n_a_; ++i)
            if (t_a >> i & 1) faulty_a_ids_.push_back(i);
        for (int j = 0; j < n_b_; ++j)
            if (t_b >> j & 1) faulty_b_ids_.push_back(j);
        bits_per_round_ =
            static_cast<int>(faulty_a_ids_.size()) * n_b_ + static_cast<int>(faulty_b_ids_.size()) * n_a_;
        k_f_ = cfg_.f_b + 1;
    }

    int bits_per_round() const { return bits_per_round_; }
    std::uint64_t branch() const { return 1ULL << bits_per_round_; }

    State initial_state() const {
        State s;
        std::memset(&s, 0, sizeof(State));
        std::memset(s.acc_a, -1, sizeof(s.acc_a));
        std::memset(s.acc_b, -1, sizeof(s.acc_b));
        for (GeneralId g = 0; g < m_; ++g) {
            s.x_a[g] = init_ones_;
            s.b_a[g] = init_ones_;
        }
        return s;
    }

    /// Run one round. choice encodes the adversary deliveries (low bits:
    /// faulty-A receiver masks, then faulty-B receiver masks); nullopt means
    /// a silent settle round. Returns whether any observable state changed.
    bool apply_round(State& s, std::optional<std::uint64_t> choice) const {
        const int k = s.round;
        bool changed = false;
        std::uint32_t adv_to_b[kMax] = {0};  // per B receiver: mask over A senders
        std::uint32_t adv_to_a[kMax] = {0};
        if (choice) {
            std::uint64_t c = *choice;
            for (std::size_t t = 0; t < faulty_a_ids_.size(); ++t) {
                std::uint32_t mask = (c >> (t * n_b_)) & low_bits(n_b_);
                for (int j = 0; j < n_b_; ++j)
                    if (mask >> j & 1) adv_to_b[j] |= 1u << faulty_a_ids_[t];
            }
            std::size_t base = faulty_a_ids_.size() * n_b_;
            for (std::size_t t = 0; t < faulty_b_ids_.size(); ++t) {
                std::uint32_t mask = (c >> (base + t * n_a_)) & low_bits(n_a_);
                for (int i = 0; i < n_a_; ++i)
                    if (mask >> i & 1) adv_to_a[i] |= 1u << faulty_b_ids_[t];
            }
        }

        std::uint32_t p2[kMax] = {0};  // per general: B senders for phase 2

        // phase 1: A -> B
        for (GeneralId g = 0; g < m_; ++g) {
            std::uint32_t send1 = s.pending_a[g] & correct_a_;
            if (k == 0) send1 |= init_ones_;
            s.pending_a[g] = 0;
            s.msgs += popcount(send1) * n_b_;
            for (int j = 0; j < n_b_; ++j) {
                if (!(correct_b_ >> j & 1)) continue;
                std::uint32_t est = s.est_b[j][g] | send1;
                if (choice) est = (est & ~fa_mask_) | adv_to_b[j];
                if (est != s.est_b[j][g]) changed = true;
                s.est_b[j][g] = est;
            }
        }
        if (k == 0) s.msgs += popcount(correct_a_ & ~init_ones_) * n_b_ * m_;  // v=0 inits

        for (int j = 0; j < n_b_; ++j) {
            if (!(correct_b_ >> j & 1)) continue;
            const std::uint32_t bit = 1u << j;
            for (GeneralId g = 0; g < m_; ++g) {
                int cnt = popcount(s.est_b[j][g]);
                if (cnt >= relay_b_ && !(s.x_b[g] & bit)) {
                    s.x_b[g] |= bit;
                    changed = true;
                }
                if ((s.x_b[g] & bit) && !(s.b_b[g] & bit)) {
                    s.b_b[g] |= bit;
                    p2[g] |= bit;
                }
                if (cnt >= accept_b_ && s.acc_b[g][j] < 0) {
                    s.acc_b[g][j] = static_cast<std::int8_t>(k);
                    s.accgen_b[j] |= 1u << g;
                    changed = true;
                }
            }
            if (inst_.protocol == Protocol::BaLever) {
                if (k == 0) {
                    s.r_a[j] = s.est_b[j][inst_.g0];
                    if (popcount(s.r_a[j]) > cfg_.f_a) bcast_once_b(s, p2, j);
                }
                if (!(s.s_b & bit) && (s.accgen_b[j] >> inst_.g0 & 1) &&
                    popcount(s.accgen_b[j]) > k) {
                    s.s_b |= bit;
                    changed = true;
                    bcast_once_b(s, p2, j);
                }
            }
        }

        // phase 2: B -> A
        for (GeneralId g = 0; g < m_; ++g) {
            std::uint32_t send1 = p2[g];  // correct senders only by construction
            s.msgs += popcount(send1) * n_a_;
            for (int i = 0; i < n_a_; ++i) {
                if (!(correct_a_ >> i & 1)) continue;
                std::uint32_t est = s.est_a[i][g] | send1;
                if (choice) est = (est & ~fb_mask_) | adv_to_a[i];
                if (est != s.est_a[i][g]) changed = true;
                s.est_a[i][g] = est;
            }
        }
        for (int i = 0; i < n_a_; ++i) {
            if (!(correct_a_ >> i & 1)) continue;
            const std::uint32_t bit = 1u << i;
            for (GeneralId g = 0; g < m_; ++g) {
                int cnt = popcount(s.est_a[i][g]);
                if (cnt >= relay_a_ && !(s.x_a[g] & bit)) {
                    s.x_a[g] |= bit;
                    changed = true;
                }
                if ((s.x_a[g] & bit) && !(s.b_a[g] & bit)) {
                    s.b_a[g] |= bit;
                    s.pending_a[g] |= bit;
                }
                if (cnt >= accept_a_ && s.acc_a[g][i] < 0) {
                    s.acc_a[g][i] = static_cast<std::int8_t>(k);
                    s.accgen_a[i] |= 1u << g;
                    changed = true;
                }
            }
            if (inst_.protocol == Protocol::BaLever &&
                popcount(s.accgen_a[i]) > cfg_.f_b && !(s.s_a & bit)) {
                s.s_a |= bit;
                changed = true;
            }
        }

        if (inst_.protocol == Protocol::BaLever && k == k_f_) {
            s.z_a = s.s_a;
            s.z_b = s.s_b;
            s.agreed = true;
        }
        ++s.round;
        return changed;
    }

    /// Silent rounds until quiescent (and, for the lever, past k_f).
    void settle(State& s) const {
        const int limit = s.round + 2 * (n_a_ + n_b_) + k_f_ + 4;
        while (s.round < limit) {
            bool must_continue = inst_.protocol == Protocol::BaLever && s.round <= k_f_;
            bool changed = apply_round(s, std::nullopt);
            if (!changed && !must_continue && no_pending(s)) return;
        }
        throw std::logic_error("settle did not quiesce");
    }

    struct LeafReport {
        bool pass = true;
        std::string property;  // first failed property, empty when pass
        State state;
    };

    /// Evaluate the pinned per-execution checks on a settled state:
    /// 1-Heaviside and 1-Dirac for the broadcast, agreement round/value,
    /// validity and the traffic budget for the lever.
    LeafReport verdict(State s) const {
        settle(s);
        LeafReport r;
        r.state = s;
        if (inst_.protocol == Protocol::BiBroadcast) {
            const GeneralId g = inst_.g0;
            if (init_ones_ == correct_a_) {  // unanimous 1
                if (!all_accepted_at(s, g, 0)) return fail(r, "heaviside-1");
            } else if (init_ones_ == 0) {
                if (anyone_accepted(s, g)) return fail(r, "heaviside-0");
            }
            if (!dirac_holds(s, g, 1)) return fail(r, "dirac");
            if (!traffic_ok(s)) return fail(r, "traffic");
        } else {
            if (!s.agreed) return fail(r, "termination");
            std::uint32_t za = s.z_a & correct_a_, zb = s.z_b & correct_b_;
            bool all1 = za == correct_a_ && zb == correct_b_;
            bool all0 = za == 0 && zb == 0;
            if (!all1 && !all0) return fail(r, "agreement");
            if (init_ones_ == correct_a_ && !all1) return fail(r, "validity");
            if (init_ones_ == 0 && !all0) return fail(r, "validity");
            if (!traffic_ok(s)) return fail(r, "traffic");
        }
        return r;
    }

    struct Outcome {
        std::uint64_t leaves = 0;
        std::uint64_t scripts_covered = 0;
        std::uint64_t pruned_subtrees = 0;
        bool all_pass = true;
        std::string failed_property;
        std::vector<std::uint64_t> failing_choices;  // per-round path
    };

    /// DFS over every adversary script of the instance. Subtrees whose
    /// verdict can no longer depend on future choices (every correct node
    /// saturated, or no threshold reachable any more) collapse into one
    /// evaluation.
    Outcome run_exhaustive() const {
        Outcome out;
        State root = initial_state();
        std::vector<std::uint64_t> path(inst_.horizon, 0);
        dfs(root, 0, path, out);
        return out;
    }

    /// Evaluate one explicit script path (for cross-checks and reporting).
    LeafReport run_script(const std::vector<std::uint64_t>& choices) const {
        State s = initial_state();
        for (std::uint64_t c : choices) apply_round(s, c);
        return verdict(s);
    }

    /// Expand a choice path into explicit per-General script lines.
    std::vector<ScriptLine> to_script_lines(const std::vector<std::uint64_t>& choices) const {
        std::vector<ScriptLine> lines;
        for (int k = 0; k < static_cast<int>(choices.size()); ++k) {
            std::uint64_t c = choices[k];
            for (std::size_t t = 0; t < faulty_a_ids_.size(); ++t) {
                std::uint32_t mask = (c >> (t * n_b_)) & low_bits(n_b_);
                for (int j = 0; j < n_b_; ++j)
                    for (GeneralId g = 0; g < m_; ++g)
                        lines.push_back({k, 1, faulty_a_ids_[t], n_a_ + j, g,
                                         static_cast<Bit>(mask >> j & 1)});
            }
            std::size_t base = faulty_a_ids_.size() * n_b_;
            for (std::size_t t = 0; t < faulty_b_ids_.size(); ++t) {
                std::uint32_t mask = (c >> (base + t * n_a_)) & low_bits(n_a_);
                for (int i = 0; i < n_a_; ++i)
                    for (GeneralId g = 0; g < m_; ++g)
                        lines.push_back({k, 2, n_a_ + faulty_b_ids_[t], i, g,
                                         static_cast<Bit>(mask >> i & 1)});
            }
        }
        return lines;
    }

    std::uint32_t correct_a() const { return correct_a_; }
    std::uint32_t correct_b() const { return correct_b_; }
    int generals() const { return m_; }

private:
    static std::uint32_t low_bits(int n) { return n >= 32 ? 0xffffffffu : (1u << n) - 1; }
    static int popcount(std::uint32_t v) { return __builtin_popcount(v); }

    void bcast_once_b(State& s, std::uint32_t* p2, int j) const {
        const GeneralId own = j;  // lever Generals are indexed by side-B node
        const std::uint32_t bit = 1u << j;
        if (s.b_b[own] & bit) return;
        s.b_b[own] |= bit;
        s.x_b[own] |= bit;
        p2[own] |= bit;
    }

    bool no_pending(const State& s) const {
        for (GeneralId g = 0; g < m_; ++g)
            if (s.pending_a[g] & correct_a_) return false;
        return true;
    }

    bool all_accepted_at(const State& s, GeneralId g, int round) const {
        for (int i = 0; i < n_a_; ++i)
            if ((correct_a_ >> i & 1) && s.acc_a[g][i] != round) return false;
        for (int j = 0; j < n_b_; ++j)
            if ((correct_b_ >> j & 1) && s.acc_b[g][j] != round) return false;
        return true;
    }

    bool anyone_accepted(const State& s, GeneralId g) const {
        for (int i = 0; i < n_a_; ++i)
            if ((correct_a_ >> i & 1) && s.acc_a[g][i] >= 0) return true;
        for (int j = 0; j < n_b_; ++j)
            if ((correct_b_ >> j & 1) && s.acc_b[g][j] >= 0) return true;
        return false;
    }

    bool dirac_holds(const State& s, GeneralId g, int k_delta) const {
        int lo = 127, hi = -1;
        bool missing = false;
        for (int i = 0; i < n_a_; ++i)
            if (correct_a_ >> i & 1) {
                if (s.acc_a[g][i] < 0) missing = true;
                else {
                    lo = std::min<int>(lo, s.acc_a[g][i]);
                    hi = std::max<int>(hi, s.acc_a[g][i]);
                }
            }
        for (int j = 0; j < n_b_; ++j)
            if (correct_b_ >> j & 1) {
                if (s.acc_b[g][j] < 0) missing = true;
                else {
                    lo = std::min<int>(lo, s.acc_b[g][j]);
                    hi = std::max<int>(hi, s.acc_b[g][j]);
                }
            }
        if (hi < 0) return true;       // nobody accepted
        if (missing) return false;     // somebody never caught up
        return hi - lo <= k_delta;
    }

    bool traffic_ok(const State& s) const {
        const int bpm = bits_per_message(m_);
        long long bound = inst_.protocol == Protocol::BaLever
                              ? 2LL * n_a_ * n_b_ * n_b_ * bpm
                              : 2LL * n_a_ * n_b_ * bpm;
        return s.msgs * bpm <= bound;
    }

    static LeafReport fail(LeafReport r, const char* what) {
        r.pass = false;
        r.property = what;
        return r;
    }

    /// Every correct node accepted every General (and, for the lever,
    /// decided 1): no future choice can change any verdict input.
    bool saturated(const State& s) const {
        for (int i = 0; i < n_a_; ++i)
            if ((correct_a_ >> i & 1) && s.accgen_a[i] != low_bits(m_)) return false;
        for (int j = 0; j < n_b_; ++j)
            if ((correct_b_ >> j & 1) && s.accgen_b[j] != low_bits(m_)) return false;
        if (inst_.protocol == Protocol::BaLever)
            return (s.s_a & correct_a_) == correct_a_ && (s.s_b & correct_b_) == correct_b_;
        return true;
    }

    /// No pending sends and no threshold reachable any more: the ceiling of
    /// every estimate (its correct 1s plus every faulty slot forced to 1)
    /// stays below the relevant threshold, so decisions are frozen.
    bool frozen(const State& s) const {
        if (!no_pending(s)) return false;
        const int fa = static_cast<int>(faulty_a_ids_.size());
        const int fb = static_cast<int>(faulty_b_ids_.size());
        for (int j = 0; j < n_b_; ++j) {
            if (!(correct_b_ >> j & 1)) continue;
            const std::uint32_t bit = 1u << j;
            for (GeneralId g = 0; g < m_; ++g) {
                int ceiling = popcount(s.est_b[j][g] & correct_a_) + fa;
                if (!(s.x_b[g] & bit) && ceiling >= relay_b_) return false;
                if (s.acc_b[g][j] < 0 && ceiling >= accept_b_) return false;
            }
        }
        for (int i = 0; i < n_a_; ++i) {
            if (!(correct_a_ >> i & 1)) continue;
            const std::uint32_t bit = 1u << i;
            for (GeneralId g = 0; g < m_; ++g) {
                int ceiling = popcount(s.est_a[i][g] & correct_b_) + fb;
                if (!(s.x_a[g] & bit) && ceiling >= relay_a_) return false;
                if (s.acc_a[g][i] < 0 && ceiling >= accept_a_) return false;
            }
        }
        return true;
    }

    void dfs(const State& s, int depth, std::vector<std::uint64_t>& path, Outcome& out) const {
        if (!out.all_pass) return;
        const std::uint64_t remaining = inst_.horizon - depth;
        if (depth > 0 && (saturated(s) || frozen(s))) {
            ++out.pruned_subtrees;
            std::uint64_t covered = 1;
            for (std::uint64_t r = 0; r < remaining; ++r) covered *= branch();
            record(s, depth, path, covered, out);
            return;
        }
        if (depth == inst_.horizon) {
            record(s, depth, path, 1, out);
            return;
        }
        for (std::uint64_t c = 0; c < branch(); ++c) {
            State child = s;
            apply_round(child, c);
            path[depth] = c;
            dfs(child, depth + 1, path, out);
            if (!out.all_pass) return;
        }
    }

    void record(const State& s, int depth, const std::vector<std::uint64_t>& path,
                std::uint64_t covered, Outcome& out) const {
        ++out.leaves;
        out.scripts_covered += covered;
        LeafReport leaf = verdict(s);
        if (!leaf.pass) {
            out.all_pass = false;
            out.failed_property = leaf.property;
            out.failing_choices.assign(path.begin(), path.begin() + depth);
        }
    }

    Instance inst_;
    BroadcastConfig cfg_;
    int n_a_ = 0, n_b_ = 0, m_ = 1;
    std::uint32_t fa_mask_ = 0, fb_mask_ = 0, correct_a_ = 0, correct_b_ = 0, init_ones_ = 0;
    int relay_a_ = 0, accept_a_ = 0, relay_b_ = 0, accept_b_ = 0;
    std::vector<int> faulty_a_ids_, faulty_b_ids_;
    int bits_per_round_ = 0;
    int k_f_ = 1;
};

/// One exhaustive work item: a corruption pair plus an initial assignment.
struct ExhaustiveItem {
    std::uint32_t t_a = 0, t_b = 0;
    std::uint32_t init_ones = 0;
};

struct ExhaustiveSummary {
    std::uint64_t items = 0;
    std::uint64_t leaves = 0;
    std::uint64_t scripts_covered = 0;
    std::uint64_t pruned_subtrees = 0;
    bool all_pass = true;
    std::string failed_property;
    std::optional<ExhaustiveItem> failing_item;
    std::vector<ScriptLine> counterexample;
};

/// Corruption sets with exactly one faulty node per nonzero budget side,
/// crossed with every initial assignment of the correct side-A nodes.
inline std::vector<ExhaustiveItem> exhaustive_items(const BroadcastConfig& cfg) {
    std::vector<std::uint32_t> ta_choices, tb_choices;
    if (cfg.f_a == 0) ta_choices.push_back(0);
    else
        for (int i = 0; i < cfg.n_a; ++i) ta_choices.push_back(1u << i);
    if (cfg.f_b == 0) tb_choices.push_back(0);
    else
        for (int j = 0; j < cfg.n_b; ++j) tb_choices.push_back(1u << j);

    std::vector<ExhaustiveItem> items;
    for (std::uint32_t ta : ta_choices)
        for (std::uint32_t tb : tb_choices) {
            std::uint32_t correct = ~ta & ((1u << cfg.n_a) - 1);
            // enumerate assignments over correct A nodes
            std::vector<int> correct_ids;
            for (int i = 0; i < cfg.n_a; ++i)
                if (correct >> i & 1) correct_ids.push_back(i);
            for (std::uint32_t pattern = 0; pattern < (1u << correct_ids.size()); ++pattern) {
                std::uint32_t ones = 0;
                for (std::size_t b = 0; b < correct_ids.size(); ++b)
                    if (pattern >> b & 1) ones |= 1u << correct_ids[b];
                items.push_back({ta, tb, ones});
            }
        }
    return items;
}

/// Fan the items over a worker pool; results merge deterministically (the
/// first failure by item order wins).
inline ExhaustiveSummary run_exhaustive_suite(const FastEngine::Instance& inst,
                                              const std::vector<ExhaustiveItem>& items,
                                              int workers = 0) {
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    struct ItemResult {
        FastEngine::Outcome outcome;
        bool done = false;
    };
    std::vector<ItemResult> results(items.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        while (true) {
            std::size_t idx = next.fetch_add(1);
            if (idx >= items.size()) return;
            FastEngine engine(inst, items[idx].t_a, items[idx].t_b, items[idx].init_ones);
            results[idx].outcome = engine.run_exhaustive();
            results[idx].done = true;
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();

    ExhaustiveSummary summary;
    summary.items = items.size();
    for (std::size_t idx = 0; idx < items.size(); ++idx) {
        const auto& out = results[idx].outcome;
        summary.leaves += out.leaves;
        summary.scripts_covered += out.scripts_covered;
        summary.pruned_subtrees += out.pruned_subtrees;
        if (summary.all_pass && !out.all_pass) {
            summary.all_pass = false;
            summary.failed_property = out.failed_property;
            summary.failing_item = items[idx];
            FastEngine engine(inst, items[idx].t_a, items[idx].t_b, items[idx].init_ones);
            summary.counterexample = engine.to_script_lines(out.failing_choices);
        }
    }
    return summary;
}

}  // namespace bilever
