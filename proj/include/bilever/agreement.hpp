#pragma once

#include <cmath>
#include <optional>
#include <span>

#include "bilever/broadcast.hpp"

namespace bilever {

/// Side-B decision block: adopt 1 once the nominal General was accepted and
/// more than k echo broadcasts have been accepted by round k.
inline Bit g_s_B(Bit y0, std::span<const Bit> y_b, int k) {
    int ones = 0;
    for (Bit b : y_b) ones += b;
    return (y0 == 1 && ones > k) ? 1 : 0;
}

/// Side-A decision block: the bands >= nB-fB and <= fB are forced; the gap
/// between them is harmless either way and resolves to 0 here.
inline Bit g_s_A(std::span<const Bit> y_b, int n_b, int f_b) {
    if (static_cast<int>(y_b.size()) != n_b)
        throw ConfigError("estimate length does not match n_B");
    int ones = 0;
    for (Bit b : y_b) ones += b;
    if (ones >= n_b - f_b) return 1;
    if (ones <= f_b) return 0;
    return 0;
}

/// Final-decision gate: release s exactly at the termination round.
inline std::optional<Bit> g_z(Bit s, int k, int k_f) {
    if (k == k_f) return s;
    return std::nullopt;
}

/// Decision block for a (k_H, k_delta) broadcast substrate: y is the accept
/// vector as of round k-k0 with k0 = max(k_H, k_delta).
inline Bit g_s_general(Bit y0, std::span<const Bit> y_at_shifted, int k, int k0) {
    if (k < k0) throw ConfigError("missing history: k < k0");
    int ones = 0;
    for (Bit b : y_at_shifted) ones += b;
    return (y0 == 1 && static_cast<long long>(k0) * ones >= k - k0) ? 1 : 0;
}

struct AgreementConfig {
    BroadcastConfig broadcast;
    int k_f = 0;

    static AgreementConfig lever(const BroadcastConfig& cfg) {
        if (!cfg.is_bipartite) throw ConfigError("the lever agreement runs on bipartite configs");
        AgreementConfig a;
        a.broadcast = cfg;
        a.k_f = cfg.f_b + 1;
        return a;
    }

    /// Termination round of the general extension over a (k_H, k_delta)
    /// substrate achieving blowup mu with budget f.
    static int general_termination(int k_h, int k_delta, double mu, int f) {
        int k0 = std::max(k_h, k_delta);
        return k0 * static_cast<int>(std::ceil(mu * f + 1.0));
    }

    /// Rounds counted by the wall clock: the initial distribution half-round
    /// plus rounds 0..k_f.
    int wall_round_count() const { return k_f + 1; }
};

struct AgreeEvent {
    NodeId node = 0;
    GeneralId general = 0;
    Bit value = 0;
    int round = 0;

    bool operator==(const AgreeEvent&) const = default;
};

/// One node of the lever agreement: runs the bipartite broadcast primitive
/// with one General slot per side-B node and folds accept events into the
/// current decision s. Side A adopts 1 after more than f_B accepted echoes;
/// side B echoes its own General once the nominal broadcast plus more than k
/// echoes have been accepted. The final decision is released at k_f.
class BaLeverNode {
public:
    BaLeverNode(Side side, NodeId id, const BroadcastConfig& cfg, GeneralId nominal,
                int debug_accept_slack = 0)
        : side_(side), id_(id), cfg_(cfg), g0_(nominal),
          primitive_(side, id, cfg, cfg.n_b, debug_accept_slack) {
        if (nominal < 0 || nominal >= cfg.n_b)
            throw ConfigError("nominal General must be a side-B index");
        y_b_.assign(cfg.n_b, 0);
        if (side == Side::B) r_a_.assign(cfg.n_a, 0);
    }

    /// Round-0 setup. Side A registers every General slot with its initial
    /// value v, so a 1 is distributed under every tag in phase 1 of round 0
    /// (and latches the relay, keeping one excitation send per General).
    std::vector<OutMessage> initiate(Bit v) {
        if (initiated_) throw ConfigError("node already initiated");
        initiated_ = true;
        std::vector<OutMessage> out;
        for (GeneralId h = 0; h < cfg_.n_b; ++h) {
            auto msgs = primitive_.init(h, side_ == Side::A ? v : 0);
            out.insert(out.end(), msgs.begin(), msgs.end());
        }
        return out;
    }

    /// Fold a phase of messages through the primitive, then run the lever
    /// rules on the phase-end state: side B starts its own broadcast after
    /// more than f_A round-0 initial ones, and echoes once the nominal
    /// General plus more than k echoes have been accepted; side A adopts 1
    /// past f_B accepted echoes.
    std::vector<OutMessage> step_phase(int round, int phase, std::span<const InMessage> msgs,
                                       std::vector<AcceptEvent>& accepts) {
        std::vector<OutMessage> out;
        if (side_ == Side::B && round == 0 && phase == 1) {
            for (const InMessage& m : msgs) {
                if (m.general != g0_ || m.value != 1) continue;
                if (m.from >= 0 && m.from < cfg_.n_a && !r_a_[m.from]) {
                    r_a_[m.from] = 1;
                    ++r_a_count_;
                }
            }
        }
        std::size_t first = accepts.size();
        append(out, primitive_.step_phase(round, phase, msgs, accepts));
        for (std::size_t i = first; i < accepts.size(); ++i) {
            GeneralId h = accepts[i].general;
            if (!y_b_[h]) {
                y_b_[h] = 1;
                ++y_b_count_;
            }
        }
        if (side_ == Side::A) {
            if (y_b_count_ > cfg_.f_b) s_ = 1;
        } else {
            if (round == 0 && phase == 1 && r_a_count_ > cfg_.f_a)
                append(out, primitive_.bcast_once(own_general(), round));
            if (s_ == 0 && y_b_[g0_] == 1 && y_b_count_ > round) {
                s_ = 1;
                append(out, primitive_.bcast_once(own_general(), round));
            }
        }
        return out;
    }

    /// Accept hook on the phase-end state; exposed for driving the node from
    /// recorded events.
    std::vector<OutMessage> on_accept(GeneralId h, int round) {
        if (h < 0 || h >= cfg_.n_b) throw ConfigError("unknown General id " + std::to_string(h));
        if (!y_b_[h]) {
            y_b_[h] = 1;
            ++y_b_count_;
        }
        std::vector<OutMessage> out;
        if (side_ == Side::A) {
            if (y_b_count_ > cfg_.f_b) s_ = 1;
        } else if (s_ == 0 && y_b_[g0_] == 1 && y_b_count_ > round) {
            s_ = 1;
            append(out, primitive_.bcast_once(own_general(), round));
        }
        return out;
    }

    std::optional<AgreeEvent> end_of_round(int k, int k_f) {
        if (k != k_f || z_.has_value()) return std::nullopt;
        z_ = s_;
        return AgreeEvent{id_, g0_, s_, k};
    }

    Bit s() const { return s_; }
    std::optional<Bit> z() const { return z_; }
    const std::vector<Bit>& accepted_generals() const { return y_b_; }
    const BiBroadcastNode& primitive() const { return primitive_; }
    GeneralId own_general() const { return id_ - cfg_.n_a; }

private:
    static void append(std::vector<OutMessage>& out, std::vector<OutMessage>&& extra) {
        out.insert(out.end(), extra.begin(), extra.end());
    }
    static void append(std::vector<OutMessage>& out, const std::vector<OutMessage>& extra) {
        out.insert(out.end(), extra.begin(), extra.end());
    }

    Side side_;
    NodeId id_;
    BroadcastConfig cfg_;
    GeneralId g0_;
    BiBroadcastNode primitive_;
    bool initiated_ = false;
    Bit s_ = 0;
    std::optional<Bit> z_;
    std::vector<Bit> y_b_;
    int y_b_count_ = 0;
    std::vector<Bit> r_a_;
    int r_a_count_ = 0;
};

}  // namespace bilever
