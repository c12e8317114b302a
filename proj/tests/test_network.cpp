#include <doctest.h>

#include <random>
#include <set>

#include "ccbfnet/errors.hpp"
#include "ccbfnet/network.hpp"
#include "test_support.hpp"

using namespace ccbfnet;

TEST_CASE("incoming neighbors of a fully connected 3-node graph") {
    const auto g = NetworkGraph::fully_connected(3);
    CHECK(g.in_neighbors(0) == std::vector<NodeId>{1, 2});
    CHECK(g.out_neighbors(0) == std::vector<NodeId>{1, 2});
    CHECK(g.neighbors(0) == std::vector<NodeId>{1, 2});
}

TEST_CASE("edgeless graph has empty neighbor sets") {
    const NetworkGraph g(3, {}, {1, 1, 1}, {1, 1, 1});
    CHECK(g.in_neighbors(0).empty());
    CHECK(g.out_neighbors(2).empty());
}

TEST_CASE("a single directed edge is mirrored between in and out sets") {
    // Node 1 influences node 2 (ids here are 0-based: edge (1, 0)).
    const NetworkGraph g(2, {{1, 0}}, {1, 1}, {1, 1});
    CHECK(g.in_neighbors(1) == std::vector<NodeId>{0});
    CHECK(g.in_neighbors(0).empty());
    CHECK(g.out_neighbors(0) == std::vector<NodeId>{1});
    CHECK(g.has_edge(1, 0));
    CHECK_FALSE(g.has_edge(0, 1));
}

TEST_CASE("graph construction rejects bad input") {
    CHECK_THROWS_AS(NetworkGraph(2, {{0, 0}}, {1, 1}, {1, 1}), ArgumentError);
    CHECK_THROWS_AS(NetworkGraph(2, {{0, 5}}, {1, 1}, {1, 1}), ArgumentError);
    CHECK_THROWS_AS(NetworkGraph(2, {}, {1, 0}, {1, 1}), ArgumentError);
    CHECK_THROWS_AS(NetworkGraph(2, {}, {1}, {1, 1}), DimensionError);
    const auto g = NetworkGraph::fully_connected(2);
    CHECK_THROWS_AS(g.in_neighbors(7), ArgumentError);
    CHECK_THROWS_AS(g.out_neighbors(-1), ArgumentError);
}

TEST_CASE("duality of in and out neighbor sets on random graphs") {
    std::mt19937 rng(1234);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 5);
        std::vector<std::pair<NodeId, NodeId>> edges;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j && rng() % 2) edges.emplace_back(i, j);
        const NetworkGraph g(n, edges, std::vector<int>(n, 1), std::vector<int>(n, 1));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const auto& in = g.in_neighbors(i);
                const auto& out = g.out_neighbors(j);
                const bool j_in_i = std::count(in.begin(), in.end(), j) > 0;
                const bool i_out_j = std::count(out.begin(), out.end(), i) > 0;
                CHECK(j_in_i == i_out_j);
            }
    }
}

TEST_CASE("1-hop gather stacks own state then ascending incoming neighbors") {
    const auto g = NetworkGraph::fully_connected(3);
    const auto s = testing::state3(g, 0.04, 0.01, 0.02);
    const Vec v = gather_neighborhood(s, g, 0, 1);
    REQUIRE(v.size() == 3);
    CHECK(v(0) == 0.04);
    CHECK(v(1) == 0.01);
    CHECK(v(2) == 0.02);
}

TEST_CASE("gather on an isolated node returns only its own state") {
    const NetworkGraph g(3, {}, {1, 1, 1}, {1, 1, 1});
    const auto s = testing::state3(g, 0.5, 0.6, 0.7);
    const Vec v = gather_neighborhood(s, g, 1, 1);
    REQUIRE(v.size() == 1);
    CHECK(v(0) == 0.6);
}

TEST_CASE("2-hop gather deduplicates against a brute-force support") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 5);
        std::vector<std::pair<NodeId, NodeId>> edges;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j && rng() % 2) edges.emplace_back(i, j);
        const NetworkGraph g(n, edges, std::vector<int>(n, 1), std::vector<int>(n, 1));
        for (int i = 0; i < n; ++i) {
            const auto support = neighborhood_support(g, i, 2);
            // Brute-force union of {i}, N_i+, and the N_j+ of every j in N_i+.
            std::set<NodeId> expect{i};
            for (NodeId j : g.in_neighbors(i)) {
                expect.insert(j);
                for (NodeId k : g.in_neighbors(j)) expect.insert(k);
            }
            CHECK(std::set<NodeId>(support.begin(), support.end()) == expect);
            CHECK(support.size() == expect.size());  // no duplicates
            CHECK(support.front() == i);
        }
    }
}

TEST_CASE("2-hop gather on the full 3-node graph matches the 1-hop support") {
    const auto g = NetworkGraph::fully_connected(3);
    const auto s = testing::state3(g, 0.04, 0.01, 0.02);
    CHECK(gather_neighborhood(s, g, 0, 2) == gather_neighborhood(s, g, 0, 1));
}

TEST_CASE("gather output length and determinism") {
    const auto g = NetworkGraph::fully_connected(4, 2, 1);
    std::mt19937 rng(5);
    const auto s = testing::random_state(g, rng, 0.0, 1.0);
    const Vec a = gather_neighborhood(s, g, 2, 2);
    const Vec b = gather_neighborhood(s, g, 2, 2);
    CHECK(a == b);  // bit-identical
    int expected = 0;
    for (NodeId id : neighborhood_support(g, 2, 2)) expected += g.state_dim(id);
    CHECK(a.size() == expected);
}

TEST_CASE("gather rejects mismatched state") {
    const auto g3 = NetworkGraph::fully_connected(3);
    const auto g4 = NetworkGraph::fully_connected(4);
    const auto s4 = NetworkState::zero(g4);
    CHECK_THROWS_AS(gather_neighborhood(s4, g3, 0, 1), DimensionError);
}

TEST_CASE("control box validation") {
    const auto g = NetworkGraph::fully_connected(2);
    auto box = ControlBox::uniform(g, 0.0, 0.75);
    CHECK_NOTHROW(box.validate(g));
    box.hi[1](0) = -0.1;
    CHECK_THROWS_AS(box.validate(g), ArgumentError);
}
