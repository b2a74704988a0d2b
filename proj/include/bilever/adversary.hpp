#pragma once

#include <algorithm>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <tuple>
#include <vector>

#include "bilever/broadcast.hpp"
#include "bilever/topology.hpp"

namespace bilever {

/// Static corruption: fixed for the whole execution. For complete graphs
/// only t_a is populated.
struct CorruptionSet {
    std::vector<NodeId> t_a, t_b;

    void validate(const BroadcastConfig& cfg) const {
        if (static_cast<int>(t_a.size()) > cfg.f_a)
            throw ConfigError("|T_A| exceeds the budget f_A");
        if (static_cast<int>(t_b.size()) > cfg.f_b)
            throw ConfigError("|T_B| exceeds the budget f_B");
        for (NodeId v : t_a)
            if (v < 0 || v >= cfg.n_a) throw ConfigError("T_A node out of side A");
        for (NodeId v : t_b)
            if (v < cfg.n_a || v >= cfg.node_count()) throw ConfigError("T_B node out of side B");
        if (!cfg.is_bipartite && !t_b.empty())
            throw ConfigError("complete-graph corruption uses a single set T");
    }

    bool contains(NodeId v) const {
        return std::find(t_a.begin(), t_a.end(), v) != t_a.end() ||
               std::find(t_b.begin(), t_b.end(), v) != t_b.end();
    }
};

/// What the adversary may inspect before choosing this phase's overrides:
/// the full planned output of the correct nodes (strong, non-adaptive-set
/// adversary; the corruption set itself is fixed).
struct AdversaryView {
    int round = 0;
    int phase = 1;
    std::span<const OutMessage> planned_correct;
};

/// Per-receiver message override for a faulty sender. nullopt means no
/// message; receivers treat absence as value 0.
class Adversary {
public:
    virtual ~Adversary() = default;
    virtual std::optional<Bit> value(int round, int phase, NodeId sender, NodeId receiver,
                                     GeneralId general, const AdversaryView& view) const = 0;
    /// Rounds the adversary can act in; nullopt = unbounded. Beyond the
    /// horizon all faulty senders are silent, which lets executions settle.
    virtual std::optional<int> horizon() const { return std::nullopt; }
};

class SilentAdversary final : public Adversary {
public:
    std::optional<Bit> value(int, int, NodeId, NodeId, GeneralId,
                             const AdversaryView&) const override {
        return std::nullopt;
    }
    std::optional<int> horizon() const override { return 0; }
};

/// Sends v to every receiver for every General each round; v=1 mimics a
/// correct node that keeps asserting its excitation.
class ConsistentAdversary final : public Adversary {
public:
    explicit ConsistentAdversary(Bit v) : v_(v) {}
    std::optional<Bit> value(int, int, NodeId, NodeId, GeneralId,
                             const AdversaryView&) const override {
        return v_;
    }

private:
    Bit v_;
};

/// Two-faced delivery: the first `ones` receivers (by index on the opposite
/// side) get 1, the rest get 0.
class SplitAdversary final : public Adversary {
public:
    SplitAdversary(int ones, const BroadcastConfig& cfg) : ones_(ones), cfg_(cfg) {}
    std::optional<Bit> value(int, int, NodeId sender, NodeId receiver, GeneralId,
                             const AdversaryView&) const override {
        int local = receiver;
        if (cfg_.is_bipartite && sender < cfg_.n_a) local = receiver - cfg_.n_a;
        return local < ones_ ? Bit(1) : Bit(0);
    }

private:
    int ones_;
    BroadcastConfig cfg_;
};

/// Independent bit per (round, phase, sender, receiver, General), sliced
/// statelessly from splitmix64 so replays and parallel runs agree.
class SeededAdversary final : public Adversary {
public:
    explicit SeededAdversary(std::uint64_t seed) : seed_(seed) {}
    std::optional<Bit> value(int round, int phase, NodeId sender, NodeId receiver,
                             GeneralId general, const AdversaryView&) const override {
        std::uint64_t h = mix64(seed_, 0xadebeefULL);
        h = mix64(h, static_cast<std::uint64_t>(round));
        h = mix64(h, static_cast<std::uint64_t>(phase));
        h = mix64(h, static_cast<std::uint64_t>(sender));
        h = mix64(h, static_cast<std::uint64_t>(receiver));
        h = mix64(h, static_cast<std::uint64_t>(general));
        return static_cast<Bit>(h & 1);
    }

private:
    std::uint64_t seed_;
};

struct ScriptLine {
    int round = 0;
    int phase = 1;
    NodeId sender = 0;
    NodeId receiver = 0;
    GeneralId general = 0;
    Bit value = 0;

    auto key() const { return std::tie(round, phase, sender, receiver, general); }
    bool operator<(const ScriptLine& o) const { return key() < o.key(); }
    bool operator==(const ScriptLine& o) const {
        return key() == o.key() && value == o.value;
    }
};

/// Fully scripted adversary: a table of explicit overrides. Senders must lie
/// inside the corruption set; entries beyond the horizon do not exist, so the
/// execution can settle.
class ExplicitScript final : public Adversary {
public:
    ExplicitScript(std::vector<ScriptLine> lines, const CorruptionSet& corruption)
        : lines_(std::move(lines)) {
        std::sort(lines_.begin(), lines_.end());
        for (std::size_t i = 0; i < lines_.size(); ++i) {
            if (!corruption.contains(lines_[i].sender))
                throw ConfigError("script overrides a non-corrupted sender " +
                                  std::to_string(lines_[i].sender));
            if (i > 0 && lines_[i].key() == lines_[i - 1].key())
                throw ConfigError("duplicate script entry");
            horizon_ = std::max(horizon_, lines_[i].round + 1);
        }
    }

    std::optional<Bit> value(int round, int phase, NodeId sender, NodeId receiver,
                             GeneralId general, const AdversaryView&) const override {
        ScriptLine probe{round, phase, sender, receiver, general, 0};
        auto it = std::lower_bound(lines_.begin(), lines_.end(), probe);
        if (it == lines_.end() || !(it->key() == probe.key())) return std::nullopt;
        return it->value;
    }

    std::optional<int> horizon() const override { return horizon_; }
    const std::vector<ScriptLine>& lines() const { return lines_; }

private:
    std::vector<ScriptLine> lines_;
    int horizon_ = 0;
};

/// One override per line: "round phase sender receiver general value".
inline std::vector<ScriptLine> parse_script(std::istream& in) {
    std::vector<ScriptLine> lines;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        ScriptLine s;
        int value;
        if (!(ls >> s.round >> s.phase >> s.sender >> s.receiver >> s.general >> value) ||
            (value != 0 && value != 1) || (s.phase != 1 && s.phase != 2))
            throw ParseError("script line " + std::to_string(lineno) +
                             ": expected 'round phase sender receiver general value'");
        s.value = static_cast<Bit>(value);
        lines.push_back(s);
    }
    return lines;
}

inline void format_script(std::span<const ScriptLine> lines, std::ostream& out) {
    for (const auto& s : lines)
        out << s.round << ' ' << s.phase << ' ' << s.sender << ' ' << s.receiver << ' '
            << s.general << ' ' << int(s.value) << '\n';
}

/// Exhaustive script space: one bit per (round, faulty sender, receiver,
/// General) delivery slot, random-access by index so enumeration slices
/// across workers without shared state.
class ScriptEnumeration {
public:
    static constexpr std::uint64_t kDefaultCap = 1ULL << 28;

    ScriptEnumeration(const BroadcastConfig& cfg, const CorruptionSet& corruption, int generals,
                      int rounds, std::uint64_t cap = kDefaultCap)
        : corruption_(corruption) {
        corruption.validate(cfg);
        if (generals < 1 || rounds < 0) throw ConfigError("need generals >= 1 and rounds >= 0");
        for (NodeId s : corruption.t_a) add_slots(cfg, s, /*phase=*/1, generals, rounds);
        for (NodeId s : corruption.t_b) add_slots(cfg, s, /*phase=*/2, generals, rounds);
        std::sort(slots_.begin(), slots_.end());
        if (slots_.size() >= 63)
            refuse(cap);
        count_ = 1ULL << slots_.size();
        if (count_ > cap) refuse(cap);
    }

    std::uint64_t count() const { return count_; }

    ExplicitScript script_at(std::uint64_t index) const {
        if (index >= count_) throw ConfigError("script index out of range");
        std::vector<ScriptLine> lines;
        lines.reserve(slots_.size());
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            ScriptLine s = slots_[i];
            s.value = static_cast<Bit>((index >> i) & 1);
            lines.push_back(s);
        }
        return ExplicitScript(std::move(lines), corruption_);
    }

private:
    void add_slots(const BroadcastConfig& cfg, NodeId sender, int phase, int generals,
                   int rounds) {
        const bool bip = cfg.is_bipartite;
        for (int k = 0; k < rounds; ++k)
            for (GeneralId g = 0; g < generals; ++g) {
                if (bip) {
                    int base = phase == 1 ? cfg.n_a : 0;
                    int count = phase == 1 ? cfg.n_b : cfg.n_a;
                    for (int j = 0; j < count; ++j)
                        slots_.push_back({k, phase, sender, base + j, g, 0});
                } else {
                    for (int j = 0; j < cfg.n_a; ++j)
                        if (j != sender) slots_.push_back({k, 1, sender, j, g, 0});
                }
            }
        if (slots_.size() >= 63) refuse(kDefaultCap);
    }

    [[noreturn]] void refuse(std::uint64_t cap) const {
        throw ConfigError("script enumeration needs 2^" + std::to_string(slots_.size()) +
                          " scripts, above the cap " + std::to_string(cap) +
                          "; raise --cap or shrink the instance");
    }

    CorruptionSet corruption_;
    std::vector<ScriptLine> slots_;
    std::uint64_t count_ = 0;
};

}  // namespace bilever
