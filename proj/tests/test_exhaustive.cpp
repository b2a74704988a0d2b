#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "bilever/exhaustive.hpp"
#include "bilever/trace_io.hpp"

using namespace bilever;

namespace {

FastEngine::Instance bi_instance(int horizon = 3, int slack = 0) {
    FastEngine::Instance inst;
    inst.protocol = Protocol::BiBroadcast;
    inst.config = BroadcastConfig::bipartite(4, 4, 1, 1);
    inst.horizon = horizon;
    inst.debug_accept_slack = slack;
    return inst;
}

FastEngine::Instance lever_instance(int horizon = 3) {
    FastEngine::Instance inst;
    inst.protocol = Protocol::BaLever;
    inst.config = BroadcastConfig::bipartite(4, 4, 1, 1);
    inst.horizon = horizon;
    return inst;
}

/// Run the same explicit script through the generic simulator.
Trace generic_run(const FastEngine::Instance& inst, std::uint32_t t_a, std::uint32_t t_b,
                  std::uint32_t init_ones, const std::vector<ScriptLine>& lines) {
    RunSpec spec;
    spec.protocol = inst.protocol;
    spec.config = inst.config;
    spec.generals = 1;
    spec.general0 = inst.g0;
    for (int i = 0; i < inst.config.n_a; ++i)
        spec.init_values.push_back((init_ones >> i & 1) && !(t_a >> i & 1) ? 1 : 0);
    for (int i = 0; i < inst.config.n_a; ++i)
        if (t_a >> i & 1) spec.corruption.t_a.push_back(i);
    for (int j = 0; j < inst.config.n_b; ++j)
        if (t_b >> j & 1) spec.corruption.t_b.push_back(inst.config.n_a + j);
    spec.adversary.strategy = lines.empty() ? "silent" : "explicit";
    spec.adversary.lines = lines;
    spec.max_rounds = inst.horizon + 2 * inst.config.node_count() + inst.config.f_b + 8;
    spec.debug_accept_slack = inst.debug_accept_slack;
    return run_execution(spec);
}

void compare_with_generic(const FastEngine::Instance& inst, std::uint32_t t_a, std::uint32_t t_b,
                          std::uint32_t init_ones, const std::vector<std::uint64_t>& choices) {
    FastEngine engine(inst, t_a, t_b, init_ones);
    auto leaf = engine.run_script(choices);
    Trace trace = generic_run(inst, t_a, t_b, init_ones, engine.to_script_lines(choices));

    // first-accept rounds must agree
    std::map<std::pair<NodeId, GeneralId>, int> generic_first;
    for (const auto& a : trace.accepts)
        generic_first.try_emplace({a.node, a.general}, a.round);
    const int n_a = inst.config.n_a, n_b = inst.config.n_b;
    for (GeneralId g = 0; g < engine.generals(); ++g) {
        for (int i = 0; i < n_a; ++i) {
            if (!(engine.correct_a() >> i & 1)) continue;
            auto it = generic_first.find({i, g});
            int expect = it == generic_first.end() ? -1 : it->second;
            REQUIRE(int(leaf.state.acc_a[g][i]) == expect);
        }
        for (int j = 0; j < n_b; ++j) {
            if (!(engine.correct_b() >> j & 1)) continue;
            auto it = generic_first.find({n_a + j, g});
            int expect = it == generic_first.end() ? -1 : it->second;
            REQUIRE(int(leaf.state.acc_b[g][j]) == expect);
        }
    }
    REQUIRE(leaf.state.msgs == trace.metrics.messages);

    if (inst.protocol == Protocol::BaLever) {
        std::map<NodeId, Bit> z;
        for (const auto& a : trace.agrees) z[a.node] = a.value;
        for (int i = 0; i < n_a; ++i)
            if (engine.correct_a() >> i & 1)
                REQUIRE(int(z.at(i)) == ((leaf.state.z_a >> i) & 1));
        for (int j = 0; j < n_b; ++j)
            if (engine.correct_b() >> j & 1)
                REQUIRE(int(z.at(n_a + j)) == ((leaf.state.z_b >> j) & 1));
    }
}

}  // namespace

TEST_CASE("fast engine matches the generic simulator on sampled scripts") {
    SplitMix rng(0xfa57);
    for (const auto& inst : {bi_instance(), lever_instance()}) {
        for (int trial = 0; trial < 60; ++trial) {
            std::uint32_t t_a = 1u << rng.next_below(4);
            std::uint32_t t_b = 1u << rng.next_below(4);
            std::uint32_t init = static_cast<std::uint32_t>(rng.next_below(16));
            FastEngine engine(inst, t_a, t_b, init);
            std::vector<std::uint64_t> choices;
            for (int k = 0; k < inst.horizon; ++k)
                choices.push_back(rng.next_below(engine.branch()));
            compare_with_generic(inst, t_a, t_b, init, choices);
        }
    }
}

TEST_CASE("fast engine matches the generic simulator without faults") {
    for (const auto& inst : {bi_instance(), lever_instance()}) {
        for (std::uint32_t init : {0u, 0xfu, 0x5u}) {
            FastEngine engine(inst, 0, 0, init);
            REQUIRE(engine.branch() == 1);
            compare_with_generic(inst, 0, 0, init, {0, 0, 0});
        }
    }
}

TEST_CASE("pruned DFS equals brute force on a short horizon") {
    for (std::uint32_t init : {0u, 0x3u, 0xfu}) {
        FastEngine::Instance inst = bi_instance(2);
        FastEngine engine(inst, 0x1, 0x2, init);
        FastEngine::Outcome pruned = engine.run_exhaustive();

        bool brute_pass = true;
        std::uint64_t total = 0;
        for (std::uint64_t c0 = 0; c0 < engine.branch() && brute_pass; ++c0)
            for (std::uint64_t c1 = 0; c1 < engine.branch() && brute_pass; ++c1) {
                ++total;
                brute_pass = engine.run_script({c0, c1}).pass;
            }
        CHECK(pruned.all_pass == brute_pass);
        CHECK(pruned.scripts_covered == engine.branch() * engine.branch());
        CHECK(pruned.leaves <= total);
    }
}

TEST_CASE("exhaustive items cover pairs times assignments") {
    auto items = exhaustive_items(BroadcastConfig::bipartite(4, 4, 1, 1));
    CHECK(items.size() == 16 * 8);  // 4x4 corruption pairs, 2^3 assignments
    for (const auto& it : items) {
        CHECK((it.init_ones & it.t_a) == 0);
        CHECK(__builtin_popcount(it.t_a) == 1);
        CHECK(__builtin_popcount(it.t_b) == 1);
    }
}

TEST_CASE("a weakened accept threshold is caught by the exhaustive run") {
    FastEngine::Instance mutant = bi_instance(2, /*slack=*/1);
    bool found = false;
    for (const auto& item : exhaustive_items(mutant.config)) {
        FastEngine engine(mutant, item.t_a, item.t_b, item.init_ones);
        auto out = engine.run_exhaustive();
        if (!out.all_pass) {
            found = true;
            CHECK(out.failed_property == "dirac");
            // the counterexample must reproduce through the generic simulator
            auto lines = engine.to_script_lines(out.failing_choices);
            Trace t = generic_run(mutant, item.t_a, item.t_b, item.init_ones, lines);
            auto verdict = verdict_dirac(t, 1, correct_nodes(t));
            CHECK_FALSE(verdict.holds);
            break;
        }
    }
    CHECK(found);
}

TEST_CASE("parallel suite merges deterministically") {
    FastEngine::Instance inst = bi_instance(2);
    std::vector<ExhaustiveItem> items = exhaustive_items(inst.config);
    items.resize(16);
    ExhaustiveSummary one = run_exhaustive_suite(inst, items, 1);
    ExhaustiveSummary two = run_exhaustive_suite(inst, items, 2);
    CHECK(one.all_pass == two.all_pass);
    CHECK(one.scripts_covered == two.scripts_covered);
    CHECK(one.leaves == two.leaves);
    CHECK(one.all_pass);
}
