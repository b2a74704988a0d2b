#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <zlib.h>

#include <json.hpp>

#include "bilever/analysis.hpp"
#include "bilever/simulator.hpp"

namespace bilever {

constexpr int kTraceFormatVersion = 1;

namespace detail {
using ojson = nlohmann::ordered_json;

inline ojson spec_to_json(const RunSpec& spec) {
    ojson h;
    h["type"] = "header";
    h["version"] = kTraceFormatVersion;
    h["protocol"] = to_string(spec.protocol);
    h["bipartite"] = spec.config.is_bipartite;
    h["n_a"] = spec.config.n_a;
    h["n_b"] = spec.config.n_b;
    h["f_a"] = spec.config.f_a;
    h["f_b"] = spec.config.f_b;
    h["generals"] = spec.generals;
    h["general0"] = spec.general0;
    h["init"] = spec.init_values;
    h["corrupt_a"] = spec.corruption.t_a;
    h["corrupt_b"] = spec.corruption.t_b;
    ojson adv;
    adv["strategy"] = spec.adversary.strategy;
    if (spec.adversary.strategy == "consistent") adv["value"] = int(spec.adversary.value);
    if (spec.adversary.strategy == "split") adv["ones"] = spec.adversary.ones;
    if (spec.adversary.strategy == "seeded-random") adv["seed"] = spec.adversary.seed;
    if (spec.adversary.strategy == "explicit") {
        ojson lines = ojson::array();
        for (const auto& l : spec.adversary.lines)
            lines.push_back({l.round, l.phase, l.sender, l.receiver, l.general, int(l.value)});
        adv["lines"] = lines;
    }
    h["adversary"] = adv;
    h["max_rounds"] = spec.max_rounds;
    return h;
}
}  // namespace detail

inline RunSpec spec_from_json(const nlohmann::ordered_json& h) {
    if (h.value("version", -1) != kTraceFormatVersion)
        throw ParseError("trace format version mismatch");
    RunSpec spec;
    spec.protocol = parse_protocol(h.at("protocol").get<std::string>());
    if (h.at("bipartite").get<bool>())
        spec.config = BroadcastConfig::bipartite(h.at("n_a"), h.at("n_b"), h.at("f_a"), h.at("f_b"));
    else
        spec.config = BroadcastConfig::complete(h.at("n_a"), h.at("f_a"));
    spec.generals = h.at("generals");
    spec.general0 = h.at("general0");
    spec.init_values = h.at("init").get<std::vector<Bit>>();
    spec.corruption.t_a = h.at("corrupt_a").get<std::vector<NodeId>>();
    spec.corruption.t_b = h.at("corrupt_b").get<std::vector<NodeId>>();
    const auto& adv = h.at("adversary");
    spec.adversary.strategy = adv.at("strategy").get<std::string>();
    spec.adversary.value = static_cast<Bit>(adv.value("value", 1));
    spec.adversary.ones = adv.value("ones", 0);
    spec.adversary.seed = adv.value("seed", std::uint64_t(0));
    if (adv.contains("lines"))
        for (const auto& l : adv.at("lines"))
            spec.adversary.lines.push_back({l.at(0), l.at(1), l.at(2), l.at(3), l.at(4),
                                            static_cast<Bit>(l.at(5).get<int>())});
    spec.max_rounds = h.at("max_rounds");
    return spec;
}

/// One JSON record per line: header, then messages/accepts/agrees/state in
/// execution order, then a summary. Field order is fixed, so equal traces
/// serialize to equal bytes.
inline std::string trace_to_jsonl(const Trace& trace) {
    using detail::ojson;
    std::ostringstream out;
    out << detail::spec_to_json(trace.spec).dump() << '\n';
    for (const auto& m : trace.messages) {
        ojson j;
        j["type"] = "message";
        j["round"] = m.round;
        j["phase"] = m.phase;
        j["from"] = m.from;
        j["to"] = m.to;
        j["general"] = m.general;
        j["value"] = int(m.value);
        j["adv"] = m.adversarial ? 1 : 0;
        out << j.dump() << '\n';
    }
    for (const auto& a : trace.accepts) {
        ojson j;
        j["type"] = "accept";
        j["round"] = a.round;
        j["node"] = a.node;
        j["general"] = a.general;
        out << j.dump() << '\n';
    }
    for (const auto& a : trace.agrees) {
        ojson j;
        j["type"] = "agree";
        j["round"] = a.round;
        j["node"] = a.node;
        j["general"] = a.general;
        j["value"] = int(a.value);
        out << j.dump() << '\n';
    }
    for (const auto& s : trace.snapshots) {
        ojson j;
        j["type"] = "state";
        j["round"] = s.round;
        j["x"] = s.x;
        if (!s.s.empty()) j["s"] = s.s;
        out << j.dump() << '\n';
    }
    {
        ojson j;
        j["type"] = "summary";
        j["rounds"] = trace.metrics.rounds_executed;
        j["quiesced"] = trace.metrics.quiesced;
        j["messages"] = trace.metrics.messages;
        j["adv_messages"] = trace.metrics.adv_messages;
        TrafficStats t = traffic_stats(trace);
        j["bits"] = t.bits;
        j["adv_bits"] = t.adv_bits;
        j["bound_bits"] = t.bound_bits;
        j["deviations"] = trace.first_deviation;
        if (trace.spec.protocol == Protocol::BaLever) {
            bool unanimous = !trace.agrees.empty();
            Bit value = unanimous ? trace.agrees.front().value : 0;
            for (const auto& a : trace.agrees)
                if (a.value != value) unanimous = false;
            j["unanimous"] = unanimous;
            j["value"] = int(value);
            j["round"] = trace.k_f();
        }
        out << j.dump() << '\n';
    }
    return out.str();
}

/// Parse only the header line of a serialized trace; enough to replay.
inline RunSpec parse_trace_header(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty trace");
    auto h = nlohmann::ordered_json::parse(line, nullptr, false);
    if (h.is_discarded() || h.value("type", "") != "header")
        throw ParseError("first trace line is not a header record");
    return spec_from_json(h);
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

inline void write_gzip_file(const std::string& path, const std::string& content) {
    gzFile f = gzopen(path.c_str(), "wb9");
    if (!f) throw std::runtime_error("cannot write " + path);
    if (!content.empty() &&
        gzwrite(f, content.data(), static_cast<unsigned>(content.size())) == 0) {
        gzclose(f);
        throw std::runtime_error("gzip write failed for " + path);
    }
    gzclose(f);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace bilever
