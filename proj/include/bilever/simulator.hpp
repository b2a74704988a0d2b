#pragma once

#include <array>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "bilever/adversary.hpp"
#include "bilever/agreement.hpp"

namespace bilever {

enum class Protocol { BroadcastKn, BiBroadcast, BaLever };

inline const char* to_string(Protocol p) {
    switch (p) {
        case Protocol::BroadcastKn: return "broadcast-kn";
        case Protocol::BiBroadcast: return "bi-broadcast";
        case Protocol::BaLever: return "ba-lever";
    }
    return "?";
}

inline Protocol parse_protocol(const std::string& s) {
    if (s == "broadcast-kn") return Protocol::BroadcastKn;
    if (s == "bi-broadcast") return Protocol::BiBroadcast;
    if (s == "ba-lever") return Protocol::BaLever;
    throw ParseError("unknown protocol '" + s + "'");
}

/// Replayable recipe for an adversary instance.
struct AdversaryDescriptor {
    std::string strategy = "silent";  // silent|consistent|split|seeded-random|explicit
    Bit value = 1;                    // consistent
    int ones = 0;                     // split
    std::uint64_t seed = 0;           // seeded-random
    std::vector<ScriptLine> lines;    // explicit

    std::unique_ptr<Adversary> instantiate(const BroadcastConfig& cfg,
                                           const CorruptionSet& corruption) const {
        if (strategy == "silent") return std::make_unique<SilentAdversary>();
        if (strategy == "consistent") return std::make_unique<ConsistentAdversary>(value);
        if (strategy == "split") return std::make_unique<SplitAdversary>(ones, cfg);
        if (strategy == "seeded-random") return std::make_unique<SeededAdversary>(seed);
        if (strategy == "explicit") return std::make_unique<ExplicitScript>(lines, corruption);
        throw ParseError("unknown adversary strategy '" + strategy + "'");
    }
};

/// Complete, replayable description of one execution. Running the same spec
/// twice yields bit-identical traces.
struct RunSpec {
    Protocol protocol = Protocol::BiBroadcast;
    BroadcastConfig config;
    int generals = 1;               // m; ba-lever forces n_b
    GeneralId general0 = 0;         // initiated (broadcast) or nominal (lever) General
    std::vector<Bit> init_values;   // per side-A node (per node for K_n)
    CorruptionSet corruption;
    AdversaryDescriptor adversary;
    int max_rounds = 0;
    // debug knobs, not part of the replay header
    int debug_accept_slack = 0;
    bool shuffle_delivery = false;
    std::uint64_t shuffle_seed = 0;
};

struct TraceMessage {
    int round = 0;
    int phase = 1;
    NodeId from = 0;
    NodeId to = 0;
    GeneralId general = 0;
    Bit value = 0;
    bool adversarial = false;
};

struct AcceptRecord {
    int round = 0;
    NodeId node = 0;
    GeneralId general = 0;
};

struct RoundSnapshot {
    int round = 0;
    std::vector<std::vector<Bit>> x;  // [general][node]
    std::vector<Bit> s;               // lever only
};

struct TraceMetrics {
    long long messages = 0;      // sent by correct nodes
    long long adv_messages = 0;  // delivered on behalf of faulty nodes
    int rounds_executed = 0;
    bool quiesced = false;
};

struct Trace {
    RunSpec spec;
    std::vector<TraceMessage> messages;
    std::vector<AcceptRecord> accepts;  // correct nodes only
    std::vector<AgreeEvent> agrees;     // correct nodes only
    std::vector<RoundSnapshot> snapshots;
    std::vector<int> first_deviation;   // per node; -1 = never deviated
    TraceMetrics metrics;

    int k_f() const { return spec.config.f_b + 1; }
};

namespace detail {

class Engine {
public:
    explicit Engine(const RunSpec& spec) : spec_(spec), cfg_(spec.config) {
        validate();
        n_ = cfg_.node_count();
        m_ = spec_.protocol == Protocol::BaLever ? cfg_.n_b : spec_.generals;
        faulty_.assign(n_, 0);
        for (NodeId v : spec_.corruption.t_a) faulty_[v] = 1;
        for (NodeId v : spec_.corruption.t_b) faulty_[v] = 1;
        adversary_ = spec_.adversary.instantiate(cfg_, spec_.corruption);
        trace_.spec = spec_;
        trace_.first_deviation.assign(n_, -1);
        build_nodes();
    }

    Trace run() {
        initiate();
        int k = 0;
        for (; k < spec_.max_rounds; ++k) {
            run_round(k);
            if (can_stop(k)) {
                trace_.metrics.quiesced = true;
                ++k;
                break;
            }
        }
        trace_.metrics.rounds_executed = std::min(k, spec_.max_rounds);
        return std::move(trace_);
    }

private:
    using PhaseQueue = std::vector<OutMessage>;

    void validate() const {
        const bool bip = cfg_.is_bipartite;
        if ((spec_.protocol == Protocol::BroadcastKn) == bip)
            throw ConfigError(bip ? "broadcast-kn runs on complete graphs"
                                  : "bipartite protocols need a bipartite topology");
        spec_.corruption.validate(cfg_);
        const int m = spec_.protocol == Protocol::BaLever ? cfg_.n_b : spec_.generals;
        if (m < 1) throw ConfigError("need at least one General");
        if (spec_.general0 < 0 || spec_.general0 >= m)
            throw ConfigError("General id out of range");
        if (static_cast<int>(spec_.init_values.size()) != cfg_.n_a)
            throw ConfigError("need one initial value per side-A node");
        if (spec_.protocol == Protocol::BaLever && spec_.max_rounds < cfg_.f_b + 2)
            throw ConfigError("max_rounds must reach past the termination round k_f = f_B+1");
        if (spec_.max_rounds < 0) throw ConfigError("max_rounds must be >= 0");
    }

    void build_nodes() {
        switch (spec_.protocol) {
            case Protocol::BroadcastKn:
                for (NodeId i = 0; i < n_; ++i)
                    kn_.emplace_back(i, cfg_, m_, spec_.debug_accept_slack);
                break;
            case Protocol::BiBroadcast:
                for (NodeId i = 0; i < n_; ++i)
                    bi_.emplace_back(i < cfg_.n_a ? Side::A : Side::B, i, cfg_, m_,
                                     spec_.debug_accept_slack);
                break;
            case Protocol::BaLever:
                for (NodeId i = 0; i < n_; ++i)
                    lever_.emplace_back(i < cfg_.n_a ? Side::A : Side::B, i, cfg_,
                                        spec_.general0, spec_.debug_accept_slack);
                break;
        }
    }

    void initiate() {
        switch (spec_.protocol) {
            case Protocol::BroadcastKn:
                for (NodeId i = 0; i < n_; ++i)
                    route(kn_[i].init(spec_.general0, spec_.init_values[i]), i);
                break;
            case Protocol::BiBroadcast:
                for (NodeId i = 0; i < cfg_.n_a; ++i)
                    route(bi_[i].init(spec_.general0, spec_.init_values[i]), i);
                for (NodeId j = cfg_.n_a; j < n_; ++j) route(bi_[j].init(spec_.general0, 0), j);
                break;
            case Protocol::BaLever:
                for (NodeId i = 0; i < n_; ++i)
                    route(lever_[i].initiate(i < cfg_.n_a ? spec_.init_values[i] : 0), i);
                break;
        }
    }

    void route(const std::vector<OutMessage>& out, NodeId from) {
        for (const OutMessage& msg : out)
            (faulty_[from] ? shadow_ : correct_)[msg.round][msg.phase - 1].push_back(msg);
    }

    bool adversary_exhausted(int round) const {
        auto h = adversary_->horizon();
        return h.has_value() && *h <= round;
    }

    bool can_stop(int k) const {
        if (spec_.protocol == Protocol::BaLever && k < cfg_.f_b + 1) return false;
        if (!adversary_exhausted(k + 1)) return false;
        for (const auto& [round, queues] : correct_)
            if (round > k && (!queues[0].empty() || !queues[1].empty())) return false;
        return true;
    }

    void run_round(int k) {
        deliver_phase(k, 1);
        if (cfg_.is_bipartite) deliver_phase(k, 2);
        if (spec_.protocol == Protocol::BaLever) {
            for (NodeId i = 0; i < n_; ++i)
                if (auto agree = lever_[i].end_of_round(k, cfg_.f_b + 1); agree && !faulty_[i])
                    trace_.agrees.push_back(*agree);
        }
        snapshot(k);
        correct_.erase(k);
        shadow_.erase(k);
    }

    void deliver_phase(int k, int phase) {
        PhaseQueue planned = take(correct_, k, phase);
        PhaseQueue shadow = take(shadow_, k, phase);
        canonical_sort(planned);
        canonical_sort(shadow);

        AdversaryView view{k, phase, planned};
        PhaseQueue overrides = adversary_messages(k, phase, view);
        record_deviations(k, phase, shadow, overrides);

        PhaseQueue actual = planned;
        actual.insert(actual.end(), overrides.begin(), overrides.end());
        canonical_sort(actual);
        if (spec_.shuffle_delivery) shuffle(actual, k, phase);

        for (const OutMessage& msg : actual) {
            bool adv = faulty_[msg.from];
            trace_.messages.push_back({k, phase, msg.from, msg.to, msg.general, msg.value, adv});
            (adv ? trace_.metrics.adv_messages : trace_.metrics.messages)++;
        }

        std::vector<std::vector<InMessage>> inbox(n_);
        for (const OutMessage& msg : actual)
            inbox[msg.to].push_back({msg.from, msg.general, msg.value});
        if (spec_.protocol == Protocol::BroadcastKn) {
            for (NodeId i = 0; i < n_; ++i) {
                std::vector<AcceptEvent> accepts;
                route(kn_[i].on_round(k, inbox[i], accepts), i);
                record_accepts(i, accepts);
            }
        } else {
            for (NodeId to = 0; to < n_; ++to) {
                if (inbox[to].empty()) continue;
                std::vector<AcceptEvent> accepts;
                if (spec_.protocol == Protocol::BiBroadcast)
                    route(bi_[to].step_phase(k, phase, inbox[to], accepts), to);
                else
                    route(lever_[to].step_phase(k, phase, inbox[to], accepts), to);
                record_accepts(to, accepts);
            }
        }
    }

    static void canonical_sort(PhaseQueue& q) {
        std::sort(q.begin(), q.end(), [](const OutMessage& a, const OutMessage& b) {
            return std::tie(a.from, a.to, a.general) < std::tie(b.from, b.to, b.general);
        });
    }

    void shuffle(PhaseQueue& q, int k, int phase) {
        SplitMix rng(mix64(spec_.shuffle_seed, std::uint64_t(k) * 2 + phase));
        for (std::size_t i = q.size(); i > 1; --i)
            std::swap(q[i - 1], q[rng.next_below(i)]);
    }

    static PhaseQueue take(std::map<int, std::array<PhaseQueue, 2>>& store, int k, int phase) {
        auto it = store.find(k);
        if (it == store.end()) return {};
        return std::move(it->second[phase - 1]);
    }

    PhaseQueue adversary_messages(int k, int phase, const AdversaryView& view) {
        PhaseQueue out;
        const auto& senders =
            !cfg_.is_bipartite ? spec_.corruption.t_a
                               : (phase == 1 ? spec_.corruption.t_a : spec_.corruption.t_b);
        for (NodeId s : senders) {
            for (NodeId r : receivers_of(s)) {
                for (GeneralId g = 0; g < m_; ++g) {
                    auto v = adversary_->value(k, phase, s, r, g, view);
                    if (v) out.push_back({k, phase, s, r, g, *v});
                }
            }
        }
        return out;
    }

    std::vector<NodeId> receivers_of(NodeId sender) const {
        std::vector<NodeId> out;
        if (!cfg_.is_bipartite) {
            for (NodeId r = 0; r < n_; ++r)
                if (r != sender) out.push_back(r);
        } else if (sender < cfg_.n_a) {
            for (NodeId r = cfg_.n_a; r < n_; ++r) out.push_back(r);
        } else {
            for (NodeId r = 0; r < cfg_.n_a; ++r) out.push_back(r);
        }
        return out;
    }

    /// A faulty node reveals itself in round k once the wire state it leaves
    /// at some receiver differs from the state a correct node, fed the same
    /// received history, would project: 1 from the round it first sends its
    /// excitation, 0 before. Re-asserting an already-sent 1 or staying silent
    /// while unexcited is not noise; suppressing or inventing a 1 is.
    void record_deviations(int k, int phase, const PhaseQueue& shadow,
                           const PhaseQueue& overrides) {
        for (const OutMessage& m : shadow)
            if (m.value) shadow_sent_[{m.from, m.general}] = 1;
        const auto& senders =
            !cfg_.is_bipartite ? spec_.corruption.t_a
                               : (phase == 1 ? spec_.corruption.t_a : spec_.corruption.t_b);
        for (const OutMessage& m : overrides) wire_[{m.from, m.to, m.general}] = m.value;
        for (NodeId s : senders) {
            if (trace_.first_deviation[s] >= 0) continue;
            for (NodeId r : receivers_of(s)) {
                for (GeneralId g = 0; g < m_; ++g) {
                    auto it = wire_.find({s, r, g});
                    Bit delivered = it == wire_.end() ? 0 : it->second;
                    auto sh = shadow_sent_.find({s, g});
                    Bit want = sh == shadow_sent_.end() ? 0 : 1;
                    if (delivered != want) {
                        trace_.first_deviation[s] = k;
                        goto next_sender;
                    }
                }
            }
        next_sender:;
        }
    }

    void record_accepts(NodeId node, const std::vector<AcceptEvent>& accepts) {
        if (faulty_[node]) return;
        for (const auto& a : accepts) trace_.accepts.push_back({a.round, node, a.general});
    }

    void snapshot(int k) {
        RoundSnapshot snap;
        snap.round = k;
        snap.x.assign(m_, std::vector<Bit>(n_, 0));
        for (GeneralId g = 0; g < m_; ++g)
            for (NodeId i = 0; i < n_; ++i) {
                switch (spec_.protocol) {
                    case Protocol::BroadcastKn: snap.x[g][i] = kn_[i].x(g); break;
                    case Protocol::BiBroadcast: snap.x[g][i] = bi_[i].x(g); break;
                    case Protocol::BaLever: snap.x[g][i] = lever_[i].primitive().x(g); break;
                }
            }
        if (spec_.protocol == Protocol::BaLever) {
            snap.s.resize(n_);
            for (NodeId i = 0; i < n_; ++i) snap.s[i] = lever_[i].s();
        }
        trace_.snapshots.push_back(std::move(snap));
    }

    RunSpec spec_;
    BroadcastConfig cfg_;
    int n_ = 0;
    int m_ = 1;
    std::vector<char> faulty_;
    std::unique_ptr<Adversary> adversary_;
    std::vector<KnBroadcastNode> kn_;
    std::vector<BiBroadcastNode> bi_;
    std::vector<BaLeverNode> lever_;
    std::map<int, std::array<PhaseQueue, 2>> correct_, shadow_;
    std::map<std::pair<NodeId, GeneralId>, Bit> shadow_sent_;
    std::map<std::tuple<NodeId, NodeId, GeneralId>, Bit> wire_;
    Trace trace_;
};

}  // namespace detail

/// Deterministic lockstep execution of the chosen protocol under the given
/// corruption and adversary. Stops early (quiesced) once the adversary is
/// exhausted and no sends are pending, at which point every later round
/// would be a no-op.
inline Trace run_execution(const RunSpec& spec) { return detail::Engine(spec).run(); }

/// Re-running the header reproduces the trace bit for bit.
inline Trace replay(const RunSpec& header) { return run_execution(header); }

}  // namespace bilever
