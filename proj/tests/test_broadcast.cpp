#include <catch2/catch_amalgamated.hpp>

#include "bilever/broadcast.hpp"

using namespace bilever;

namespace {
std::vector<Bit> bits(std::initializer_list<int> v) {
    std::vector<Bit> out;
    for (int b : v) out.push_back(static_cast<Bit>(b));
    return out;
}

BroadcastConfig k44() { return BroadcastConfig::bipartite(4, 4, 1, 1); }

InMessage from_b(int j, Bit v, GeneralId g = 0) { return {4 + j, g, v}; }
InMessage from_a(int i, Bit v, GeneralId g = 0) { return {i, g, v}; }
}  // namespace

TEST_CASE("K_n relay threshold n-2f") {
    auto est = bits({1, 1, 0, 0});
    CHECK(decide_relay_kn(est, 4, 1) == 1);
    CHECK(decide_relay_kn(bits({0, 0, 0, 0}), 4, 1) == 0);
    CHECK(decide_relay_kn(bits({1, 0, 0, 0}), 4, 1) == 0);
    CHECK_THROWS_AS(decide_relay_kn(bits({1, 0}), 4, 1), ConfigError);
}

TEST_CASE("K_n accept threshold n-f") {
    CHECK(decide_accept_kn(bits({1, 1, 1, 0}), 4, 1) == 1);
    CHECK(decide_accept_kn(bits({1, 1, 1, 1}), 4, 1) == 1);
    CHECK(decide_accept_kn(bits({1, 1, 0, 0}), 4, 1) == 0);
    CHECK_THROWS_AS(decide_accept_kn(bits({1}), 4, 1), ConfigError);
}

TEST_CASE("config validation names the violated bound") {
    CHECK_THROWS_WITH(BroadcastConfig::complete(3, 1),
                      Catch::Matchers::ContainsSubstring("3f+1"));
    CHECK_NOTHROW(BroadcastConfig::complete(4, 1));
    CHECK_THROWS_WITH(BroadcastConfig::bipartite(3, 4, 1, 1),
                      Catch::Matchers::ContainsSubstring("3f_A+1"));
    CHECK_THROWS_WITH(BroadcastConfig::bipartite(4, 3, 1, 1),
                      Catch::Matchers::ContainsSubstring("3f_B+1"));
    CHECK_NOTHROW(BroadcastConfig::bipartite(4, 4, 1, 1));

    BroadcastConfig c = k44();
    CHECK(c.relay_threshold(Side::A) == 2);
    CHECK(c.accept_threshold(Side::A) == 3);
}

TEST_CASE("side A relays next round after n_B-2f_B ones") {
    BiBroadcastNode node(Side::A, 0, k44(), 1);
    std::vector<AcceptEvent> accepts;
    CHECK(node.step_phase(1, 2, std::vector{from_b(0, 1)}, accepts).empty());
    CHECK(node.x(0) == 0);
    auto out = node.step_phase(1, 2, std::vector{from_b(1, 1)}, accepts);
    CHECK(node.x(0) == 1);
    REQUIRE(out.size() == 4);  // relay to every side-B node
    for (const auto& m : out) {
        CHECK(m.round == 2);  // next round
        CHECK(m.phase == 1);
        CHECK(m.value == 1);
    }
    CHECK(accepts.empty());

    // third one crosses the accept threshold; relay does not repeat
    auto more = node.step_phase(1, 2, std::vector{from_b(2, 1)}, accepts);
    CHECK(more.empty());
    REQUIRE(accepts.size() == 1);
    CHECK(accepts[0].general == 0);
    CHECK(accepts[0].round == 1);
    CHECK(node.accept_round(0) == 1);
}

TEST_CASE("side B relays in the same round") {
    BiBroadcastNode node(Side::B, 4, k44(), 1);
    std::vector<AcceptEvent> accepts;
    node.step_phase(0, 1, std::vector{from_a(0, 1)}, accepts);
    auto out = node.step_phase(0, 1, std::vector{from_a(1, 1)}, accepts);
    REQUIRE(out.size() == 4);
    for (const auto& m : out) {
        CHECK(m.round == 0);  // same round
        CHECK(m.phase == 2);
        CHECK(m.to < 4);
    }
    node.step_phase(0, 1, std::vector{from_a(2, 1)}, accepts);
    REQUIRE(accepts.size() == 1);
}

TEST_CASE("all-zero estimates stay silent") {
    BiBroadcastNode node(Side::B, 4, k44(), 1);
    std::vector<AcceptEvent> accepts;
    for (int i = 0; i < 4; ++i) CHECK(node.step_phase(0, 1, std::vector{from_a(i, 0)}, accepts).empty());
    CHECK(node.x(0) == 0);
    CHECK(accepts.empty());
}

TEST_CASE("init latches the relay when v=1") {
    BiBroadcastNode node(Side::A, 0, k44(), 1);
    auto out = node.init(0, 1);
    REQUIRE(out.size() == 4);
    for (const auto& m : out) {
        CHECK(m.round == 0);
        CHECK(m.value == 1);
    }
    // excitation threshold later must not re-broadcast
    std::vector<AcceptEvent> accepts;
    CHECK(node.step_phase(0, 2, std::vector{from_b(0, 1)}, accepts).empty());
    CHECK(node.step_phase(0, 2, std::vector{from_b(1, 1)}, accepts).empty());
    CHECK(node.relayed(0) == 1);
}

TEST_CASE("a v=0 init is delivered but carries no excitation") {
    BiBroadcastNode a(Side::A, 0, k44(), 1);
    auto out = a.init(0, 0);
    REQUIRE(out.size() == 4);
    CHECK(out[0].value == 0);

    BiBroadcastNode b(Side::B, 4, k44(), 1);
    std::vector<AcceptEvent> accepts;
    for (int i = 0; i < 4; ++i) b.step_phase(0, 1, std::vector{from_a(i, 0)}, accepts);
    CHECK(b.x(0) == 0);
    CHECK(accepts.empty());
}

TEST_CASE("init after round 0 is rejected") {
    BiBroadcastNode node(Side::A, 0, k44(), 1);
    std::vector<AcceptEvent> accepts;
    node.step_phase(0, 2, std::vector{from_b(0, 1)}, accepts);
    CHECK_THROWS_AS(node.init(0, 1), ConfigError);
}

TEST_CASE("wrong phase or stranger sender is a protocol violation") {
    BiBroadcastNode node(Side::A, 0, k44(), 1);
    std::vector<AcceptEvent> accepts;
    CHECK_THROWS_AS(node.step_phase(0, 1, std::vector{from_b(0, 1)}, accepts), std::logic_error);
    CHECK_THROWS_AS(node.step_phase(0, 2, std::vector{from_a(1, 1)}, accepts), std::logic_error);
    CHECK_THROWS_AS(node.step_phase(0, 2, std::vector{InMessage{4, 3, 1}}, accepts), ConfigError);
}

TEST_CASE("state is monotone under arbitrary message fuzz") {
    SplitMix rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        BiBroadcastNode node(Side::B, 4, k44(), 2);
        std::vector<AcceptEvent> accepts;
        int relay_bursts = 0;
        Bit last_x = 0;
        int last_accept = -1;
        for (int round = 0; round < 6; ++round) {
            for (int i = 0; i < 4; ++i) {
                if (rng.next_bit()) continue;
                GeneralId g = static_cast<GeneralId>(rng.next_below(2));
                auto out = node.step_phase(round, 1, std::vector{from_a(i, rng.next_bit(), g)}, accepts);
                relay_bursts += out.empty() ? 0 : 1;
                CHECK(node.x(0) >= last_x);
                last_x = node.x(0);
                if (last_accept >= 0) CHECK(node.accept_round(0) == last_accept);
                if (node.accept_round(0) >= 0) last_accept = node.accept_round(0);
            }
        }
        CHECK(relay_bursts <= 2);  // at most one relay burst per General
        for (GeneralId g = 0; g < 2; ++g)
            if (node.relayed(g)) CHECK(node.x(g) == 1);
    }
}

TEST_CASE("K_n node accepts a unanimous round immediately") {
    BroadcastConfig cfg = BroadcastConfig::complete(4, 1);
    KnBroadcastNode node(0, cfg, 1);
    node.init(0, 1);
    std::vector<AcceptEvent> accepts;
    std::vector<InMessage> inbox = {{1, 0, 1}, {2, 0, 1}, {3, 0, 1}};
    node.on_round(0, inbox, accepts);
    REQUIRE(accepts.size() == 1);
    CHECK(accepts[0].round == 0);
}

TEST_CASE("K_n node relays one round later") {
    BroadcastConfig cfg = BroadcastConfig::complete(4, 1);
    KnBroadcastNode node(0, cfg, 1);
    node.init(0, 0);
    std::vector<AcceptEvent> accepts;
    std::vector<InMessage> inbox = {{1, 0, 1}, {2, 0, 1}};
    auto out = node.on_round(3, inbox, accepts);
    CHECK(accepts.empty());  // 2 ones + own 0 stays below n-f
    REQUIRE(out.size() == 3);
    CHECK(out[0].round == 4);
    CHECK(node.x(0) == 1);
}
