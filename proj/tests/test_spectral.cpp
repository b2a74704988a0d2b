#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bilever/spectral.hpp"
#include "oracles.hpp"

using namespace bilever;
using Catch::Approx;

TEST_CASE("complete bipartite spectra are +-sqrt(ab) plus zeros") {
    for (auto [a, b] : {std::pair{2, 2}, {3, 3}, {2, 3}, {4, 4}}) {
        SpectralReport r = spectral_report(build_complete_bipartite(a, b));
        REQUIRE(static_cast<int>(r.eigenvalues.size()) == a + b);
        CHECK(r.eigenvalues.front() == Approx(-std::sqrt(double(a * b))).margin(1e-8));
        CHECK(r.eigenvalues.back() == Approx(std::sqrt(double(a * b))).margin(1e-8));
        CHECK(std::abs(r.lambda) < 1e-8);
        CHECK(r.d0 == b);
        CHECK(r.d1 == a);
    }
}

TEST_CASE("K_{2,2} full spectrum") {
    SpectralReport r = spectral_report(build_complete_bipartite(2, 2));
    CHECK(r.eigenvalues[0] == Approx(-2.0).margin(1e-8));
    CHECK(r.eigenvalues[1] == Approx(0.0).margin(1e-8));
    CHECK(r.eigenvalues[2] == Approx(0.0).margin(1e-8));
    CHECK(r.eigenvalues[3] == Approx(2.0).margin(1e-8));
}

TEST_CASE("folded butterfly has a spectral gap") {
    SpectralReport r = spectral_report(butterfly_to_bipartite(build_butterfly(2)).graph);
    CHECK(r.d0 == 4);
    CHECK(r.d1 == 4);
    CHECK(r.eigenvalues.back() == Approx(4.0).margin(1e-8));
    CHECK(r.lambda < 4.0);
    CHECK(r.lambda_squared == Approx(r.lambda * r.lambda));
}

TEST_CASE("disconnected graphs are rejected") {
    Topology g(TopologyKind::Explicit, 4, 2);
    g.add_edge(0, 2);
    g.add_edge(1, 3);
    CHECK_THROWS_AS(spectral_report(g), ConfigError);
}

TEST_CASE("mu bound arithmetic") {
    auto b1 = mu_bound(0.01, 0.5, 0.1, 10.0);
    REQUIRE(b1.has_value());
    CHECK(*b1 == Approx(10.0));

    CHECK_FALSE(mu_bound(0.5, 0.5, 0.0, 1.0).has_value());

    auto b3 = mu_bound(0.02, 0.5, 0.0, 1.0);
    REQUIRE(b3.has_value());
    CHECK(*b3 == Approx(std::sqrt(50.0)));

    CHECK_THROWS_AS(mu_bound(0.0, 0.5, 0.0, 1.0), ConfigError);
}

TEST_CASE("edge-count concentration on complete bipartite graphs") {
    Topology k22 = build_complete_bipartite(2, 2);
    auto r = edge_count_bound_check(k22, {0, 1}, {2, 3});
    CHECK(r.e == 4);
    CHECK(r.center == Approx(4.0));
    CHECK(r.slack == Approx(0.0).margin(1e-12));
    CHECK(r.holds);

    Topology k33 = build_complete_bipartite(3, 3);
    auto single = edge_count_bound_check(k33, {0}, {3});
    CHECK(single.e == 1);
    CHECK(single.center == Approx(1.0));
    CHECK(single.holds);

    CHECK_THROWS_AS(edge_count_bound_check(k22, {}, {2}), ConfigError);
    CHECK_THROWS_AS(edge_count_bound_check(k22, {2}, {2}), ConfigError);
}

TEST_CASE("edge-count bound rejects non-biregular graphs") {
    Topology g(TopologyKind::Explicit, 4, 2);
    g.add_edge(0, 2);
    g.add_edge(0, 3);
    g.add_edge(1, 2);
    CHECK_THROWS_AS(edge_count_bound_check(g, {0}, {2}), ConfigError);
}

TEST_CASE("edge-count bound fuzz on the folded butterfly") {
    ButterflySimulation sim = butterfly_to_bipartite(build_butterfly(4));
    double lambda = spectral_report(sim.graph).lambda;
    const int s = sim.graph.side_a_size();
    SplitMix rng(411);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<NodeId> s0, s1;
        while (s0.empty())
            for (NodeId v = 0; v < s; ++v)
                if (rng.next_bit()) s0.push_back(v);
        while (s1.empty())
            for (NodeId v = s; v < 2 * s; ++v)
                if (rng.next_bit()) s1.push_back(v);
        auto r = edge_count_bound_check(sim.graph, s0, s1, lambda);
        CHECK(r.e == oracle::count_cross_edges(sim.graph, s0, s1));
        CHECK(r.holds);
    }
}
