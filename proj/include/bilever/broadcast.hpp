#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bilever/core.hpp"

namespace bilever {

/// Relay rule of the complete-graph primitive: fire once n-2f distinct nodes
/// are seen excited.
inline Bit decide_relay_kn(std::span<const Bit> estimate, int n, int f) {
    if (static_cast<int>(estimate.size()) != n)
        throw ConfigError("estimate length does not match n");
    int ones = 0;
    for (Bit b : estimate) ones += b;
    return ones >= n - 2 * f ? 1 : 0;
}

/// Accept rule of the complete-graph primitive: threshold n-f.
inline Bit decide_accept_kn(std::span<const Bit> estimate, int n, int f) {
    if (static_cast<int>(estimate.size()) != n)
        throw ConfigError("estimate length does not match n");
    int ones = 0;
    for (Bit b : estimate) ones += b;
    return ones >= n - f ? 1 : 0;
}

/// Validated fault budget for a broadcast (or agreement) instance.
struct BroadcastConfig {
    bool is_bipartite = false;
    int n_a = 0, n_b = 0;  // complete case: n_a = n, n_b = 0
    int f_a = 0, f_b = 0;

    static BroadcastConfig complete(int n, int f) {
        if (n < 1 || f < 0) throw ConfigError("need n >= 1 and f >= 0");
        if (n <= 3 * f)
            throw ConfigError("n = " + std::to_string(n) + " is fewer than 3f+1 = " +
                              std::to_string(3 * f + 1) + " nodes; the f-Byzantine broadcast "
                              "problem is unsolvable below 3f+1");
        BroadcastConfig c;
        c.n_a = n;
        c.f_a = f;
        return c;
    }

    static BroadcastConfig bipartite(int n_a, int n_b, int f_a, int f_b) {
        if (n_a < 1 || n_b < 1 || f_a < 0 || f_b < 0)
            throw ConfigError("need n_a, n_b >= 1 and f_a, f_b >= 0");
        if (n_a <= 3 * f_a)
            throw ConfigError("n_A = " + std::to_string(n_a) + " violates the side bound n_A >= 3f_A+1 = " +
                              std::to_string(3 * f_a + 1));
        if (n_b <= 3 * f_b)
            throw ConfigError("n_B = " + std::to_string(n_b) + " violates the side bound n_B >= 3f_B+1 = " +
                              std::to_string(3 * f_b + 1));
        BroadcastConfig c;
        c.is_bipartite = true;
        c.n_a = n_a;
        c.n_b = n_b;
        c.f_a = f_a;
        c.f_b = f_b;
        return c;
    }

    int node_count() const { return n_a + n_b; }

    // thresholds seen by a node of the given side (counting opposite-side senders)
    int relay_threshold(Side s) const {
        return s == Side::A ? n_b - 2 * f_b : n_a - 2 * f_a;
    }
    int accept_threshold(Side s) const {
        return s == Side::A ? n_b - f_b : n_a - f_a;
    }
};

struct OutMessage {
    int round = 0;
    int phase = 1;  // 1: A sends, 2: B sends
    NodeId from = 0;
    NodeId to = 0;
    GeneralId general = 0;
    Bit value = 0;
};

struct InMessage {
    NodeId from = 0;
    GeneralId general = 0;
    Bit value = 0;
};

struct AcceptEvent {
    GeneralId general = 0;
    int round = 0;
};

/// One side-A or side-B node of the bipartite relay broadcast, tracking the
/// per-General state (x, b, estimate of the opposite side, accept round).
/// Thresholds are evaluated on every arrival; a node relays value 1 exactly
/// once per General (b latches), side B in the same round, side A in the
/// next one.
class BiBroadcastNode {
public:
    // debug_accept_slack weakens the accept threshold; used only by the
    // mutation-killing test.
    BiBroadcastNode(Side side, NodeId id, const BroadcastConfig& cfg, int generals,
                    int debug_accept_slack = 0)
        : side_(side), id_(id), cfg_(cfg), started_(false) {
        if (!cfg.is_bipartite) throw ConfigError("bipartite node needs a bipartite config");
        opposite_n_ = side == Side::A ? cfg.n_b : cfg.n_a;
        opposite_base_ = side == Side::A ? cfg.n_a : 0;
        relay_th_ = cfg.relay_threshold(side);
        accept_th_ = cfg.accept_threshold(side) - debug_accept_slack;
        slots_.resize(generals);
        for (auto& s : slots_) s.estimate.assign(opposite_n_, 0);
    }

    /// Fig-style init: register General g with value v (side B always 0) and,
    /// on side A, broadcast v in phase 1 of round 0. Must precede round 0.
    std::vector<OutMessage> init(GeneralId g, Bit v) {
        if (started_) throw ConfigError("init after round 0 is not allowed");
        if (side_ == Side::B && v != 0) throw ConfigError("side-B init value must be 0");
        Slot& s = slot(g);
        s.x = s.b = v;
        std::fill(s.estimate.begin(), s.estimate.end(), 0);
        s.count = 0;
        if (side_ == Side::A) return broadcast(g, v, 0);
        return {};
    }

    /// Fold a whole phase of delivered messages into the estimates, then
    /// evaluate the relay and accept rules on the completed round estimate.
    /// Returns relay messages (side B for the same round, side A for the
    /// next) and reports accepts through `accepts`.
    std::vector<OutMessage> step_phase(int round, int phase, std::span<const InMessage> msgs,
                                       std::vector<AcceptEvent>& accepts) {
        started_ = true;
        const int expected_phase = side_ == Side::A ? 2 : 1;
        for (const InMessage& m : msgs) {
            if (phase != expected_phase)
                throw std::logic_error("protocol violation: message in wrong phase");
            int local = m.from - opposite_base_;
            if (local < 0 || local >= opposite_n_)
                throw std::logic_error("protocol violation: sender is not a neighbour");
            Slot& s = slot(m.general);
            Bit old = s.estimate[local];
            s.estimate[local] = m.value;
            s.count += int(m.value) - int(old);
        }
        std::vector<OutMessage> out;
        for (GeneralId g = 0; g < static_cast<int>(slots_.size()); ++g) {
            Slot& s = slots_[g];
            if (s.count >= relay_th_) s.x = 1;
            if (s.x == 1 && !s.b) {
                s.b = 1;
                auto relay = broadcast(g, 1, side_ == Side::B ? round : round + 1);
                out.insert(out.end(), relay.begin(), relay.end());
            }
            if (s.count >= accept_th_ && s.accept_round < 0) {
                s.accept_round = round;
                accepts.push_back({g, round});
            }
        }
        return out;
    }

    /// Assert value 1 for General g once: no-op when the relay latch is
    /// already set. Backs the lever's own-General and echo broadcasts.
    std::vector<OutMessage> bcast_once(GeneralId g, int round) {
        Slot& s = slot(g);
        if (s.b) return {};
        s.b = 1;
        s.x = 1;
        return broadcast(g, 1, round);
    }

    Bit x(GeneralId g) const { return slots_[g].x; }
    Bit relayed(GeneralId g) const { return slots_[g].b; }
    Bit accepted(GeneralId g) const { return slots_[g].accept_round >= 0 ? 1 : 0; }
    int accept_round(GeneralId g) const { return slots_[g].accept_round; }
    const std::vector<Bit>& estimate(GeneralId g) const { return slots_[g].estimate; }
    Side side() const { return side_; }
    NodeId id() const { return id_; }
    int generals() const { return static_cast<int>(slots_.size()); }

private:
    struct Slot {
        Bit x = 0;
        Bit b = 0;
        int count = 0;
        int accept_round = -1;
        std::vector<Bit> estimate;
    };

    Slot& slot(GeneralId g) {
        if (g < 0 || g >= static_cast<int>(slots_.size()))
            throw ConfigError("unknown General id " + std::to_string(g));
        return slots_[g];
    }

    std::vector<OutMessage> broadcast(GeneralId g, Bit v, int round) {
        std::vector<OutMessage> out;
        out.reserve(opposite_n_);
        const int phase = side_ == Side::A ? 1 : 2;
        for (int j = 0; j < opposite_n_; ++j)
            out.push_back({round, phase, id_, opposite_base_ + j, g, v});
        return out;
    }

    Side side_;
    NodeId id_;
    BroadcastConfig cfg_;
    int opposite_n_ = 0;
    int opposite_base_ = 0;
    int relay_th_ = 0;
    int accept_th_ = 0;
    bool started_ = false;
    std::vector<Slot> slots_;
};

/// Degenerate single-side machine realizing the K_n primitive through
/// decide_relay_kn / decide_accept_kn. Rounds have one send phase; the
/// node's own slot in the estimate tracks its current state.
class KnBroadcastNode {
public:
    KnBroadcastNode(NodeId id, const BroadcastConfig& cfg, int generals,
                    int debug_accept_slack = 0)
        : id_(id), cfg_(cfg), slack_(debug_accept_slack) {
        if (cfg.is_bipartite) throw ConfigError("K_n node needs a complete-graph config");
        slots_.resize(generals);
        for (auto& s : slots_) s.estimate.assign(cfg.n_a, 0);
    }

    std::vector<OutMessage> init(GeneralId g, Bit v) {
        if (started_) throw ConfigError("init after round 0 is not allowed");
        Slot& s = slot(g);
        s.x = s.b = v;
        std::fill(s.estimate.begin(), s.estimate.end(), 0);
        s.estimate[id_] = v;
        return broadcast(g, v, 0);
    }

    /// Deliver all of round k's messages, then evaluate accept and relay for
    /// the round. Relays go out in round k+1.
    std::vector<OutMessage> on_round(int round, std::span<const InMessage> msgs,
                                     std::vector<AcceptEvent>& accepts) {
        started_ = true;
        for (const auto& m : msgs) {
            if (m.from == id_) throw std::logic_error("protocol violation: self message");
            slot(m.general).estimate[m.from] = m.value;
        }
        std::vector<OutMessage> out;
        for (GeneralId g = 0; g < static_cast<int>(slots_.size()); ++g) {
            Slot& s = slots_[g];
            int n = cfg_.n_a, f = cfg_.f_a;
            int ones = 0;
            for (Bit b : s.estimate) ones += b;
            Bit acc = slack_ == 0 ? decide_accept_kn(s.estimate, n, f)
                                  : Bit(ones >= n - f - slack_);
            if (acc && s.accept_round < 0) {
                s.accept_round = round;
                accepts.push_back({g, round});
            }
            if (decide_relay_kn(s.estimate, n, f)) s.x = 1;
            if (s.x == 1 && !s.b) {
                s.b = 1;
                s.estimate[id_] = 1;
                auto msgs_out = broadcast(g, 1, round + 1);
                out.insert(out.end(), msgs_out.begin(), msgs_out.end());
            }
        }
        return out;
    }

    Bit x(GeneralId g) const { return slots_[g].x; }
    int accept_round(GeneralId g) const { return slots_[g].accept_round; }

private:
    struct Slot {
        Bit x = 0;
        Bit b = 0;
        int accept_round = -1;
        std::vector<Bit> estimate;
    };

    Slot& slot(GeneralId g) {
        if (g < 0 || g >= static_cast<int>(slots_.size()))
            throw ConfigError("unknown General id " + std::to_string(g));
        return slots_[g];
    }

    std::vector<OutMessage> broadcast(GeneralId g, Bit v, int round) {
        std::vector<OutMessage> out;
        out.reserve(cfg_.n_a - 1);
        for (int j = 0; j < cfg_.n_a; ++j)
            if (j != id_) out.push_back({round, 1, id_, j, g, v});
        return out;
    }

    NodeId id_;
    BroadcastConfig cfg_;
    int slack_ = 0;
    bool started_ = false;
    std::vector<Slot> slots_;
};

}  // namespace bilever
