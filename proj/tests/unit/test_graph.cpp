#include <doctest.h>

#include "oracles.hpp"
#include "steinrl/graph.hpp"

using namespace steinrl;

namespace {

WeightedGraph path3() {
    WeightedGraph g(3);
    g.add_edge(0, 1, 1);
    g.add_edge(1, 2, 1);
    return g;
}

StpInstance instance_of(WeightedGraph g, std::vector<Vertex> terminals) {
    StpInstance inst;
    inst.graph = std::move(g);
    inst.terminals = std::move(terminals);
    inst.validate();
    return inst;
}

}  // namespace

TEST_CASE("graph rejects malformed edges") {
    WeightedGraph g(3);
    g.add_edge(0, 1, 2.5);
    CHECK_THROWS_AS(g.add_edge(0, 0, 1), GraphError);
    CHECK_THROWS_AS(g.add_edge(1, 0, 1), GraphError);
    CHECK_THROWS_AS(g.add_edge(0, 3, 1), GraphError);
    CHECK_THROWS_AS(g.add_edge(1, 2, 0), GraphError);
    CHECK_THROWS_AS(g.add_edge(1, 2, -1), GraphError);
    CHECK_THROWS_AS(g.add_edge(1, 2, kInfinity), GraphError);
}

TEST_CASE("edges are visible from both endpoints with equal weight") {
    std::mt19937_64 rng(3);
    auto g = oracle::random_connected_graph(12, 0.3, 5, rng);
    for (std::size_t i = 0; i < g.edge_count(); ++i) {
        const auto& e = g.edge(i);
        int seen = 0;
        for (Vertex x : {e.u, e.v}) {
            for (const auto& inc : g.incident(x)) {
                if (inc.edge == i) {
                    CHECK(inc.neighbor == e.other(x));
                    ++seen;
                }
            }
        }
        CHECK(seen == 2);
        CHECK(g.find_edge(e.v, e.u) == i);
    }
}

TEST_CASE("instance validation") {
    CHECK_THROWS_AS(instance_of(path3(), {}), GraphError);
    CHECK_THROWS_AS(instance_of(path3(), {0, 5}), GraphError);
    WeightedGraph split(4);
    split.add_edge(0, 1, 1);
    split.add_edge(2, 3, 1);
    CHECK_THROWS_AS(instance_of(split, {0, 2}), GraphError);
    // Unreachable non-terminal vertices are allowed.
    CHECK_NOTHROW(instance_of(split, {0, 1}));
    auto inst = instance_of(path3(), {2, 0, 2});
    CHECK(inst.terminals == std::vector<Vertex>{0, 2});
}

TEST_CASE("shortest paths") {
    CHECK(shortest_paths(path3(), 0) == std::vector<double>{0, 1, 2});
    WeightedGraph tri(3);
    tri.add_edge(0, 1, 1);
    tri.add_edge(1, 2, 1);
    tri.add_edge(0, 2, 3);
    CHECK(shortest_paths(tri, 0)[2] == 2.0);
    CHECK_THROWS_AS(shortest_paths(tri, 3), GraphError);

    WeightedGraph split(3);
    split.add_edge(0, 1, 1);
    CHECK(shortest_paths(split, 0)[2] == kInfinity);
}

TEST_CASE("shortest paths agree with Floyd-Warshall and satisfy the triangle property") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        auto g = oracle::random_connected_graph(3 + trial % 15, 0.25, 9, rng);
        auto fw = oracle::floyd_warshall(g);
        for (Vertex s = 0; s < g.vertex_count(); ++s) {
            auto d = shortest_paths(g, s);
            CHECK(d[s] == 0.0);
            for (Vertex v = 0; v < g.vertex_count(); ++v) CHECK(d[v] == fw[s][v]);
            for (const auto& e : g.edges()) {
                CHECK(d[e.u] <= d[e.v] + e.w);
                CHECK(d[e.v] <= d[e.u] + e.w);
            }
        }
    }
}

TEST_CASE("terminal distance matrix") {
    auto inst = instance_of(path3(), {0, 2});
    auto table = terminal_distance_matrix(inst);
    CHECK(table.vertices == 3);
    CHECK(table.terminals == 2);
    CHECK(table.at(1, 0) == 1.0);
    CHECK(table.at(1, 1) == 1.0);
    CHECK(table.at(0, 0) == 0.0);
    CHECK(table.at(0, 1) == 2.0);

    auto single = instance_of(path3(), {0});
    auto one = terminal_distance_matrix(single);
    CHECK(one.terminals == 1);
    auto d = shortest_paths(single.graph, 0);
    for (Vertex v = 0; v < 3; ++v) CHECK(one.at(v, 0) == d[v]);

    WeightedGraph split(4);
    split.add_edge(0, 1, 1);
    split.add_edge(2, 3, 1);
    auto partial = terminal_distance_matrix(instance_of(split, {0, 1}));
    CHECK(partial.is_candidate(1));
    CHECK_FALSE(partial.is_candidate(2));
    CHECK(partial.at(3, 0) == kInfinity);
}

TEST_CASE("terminal distance matrix is symmetric between terminals") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        auto inst = oracle::random_instance(12, 5, 0.2, 5, rng);
        auto table = terminal_distance_matrix(inst);
        auto fw = oracle::floyd_warshall(inst.graph);
        for (int i = 0; i < table.terminals; ++i) {
            for (int j = 0; j < table.terminals; ++j) {
                CHECK(table.at(inst.terminals[i], j) == table.at(inst.terminals[j], i));
            }
        }
        for (Vertex v = 0; v < table.vertices; ++v)
            for (int j = 0; j < table.terminals; ++j) CHECK(table.at(v, j) == fw[v][inst.terminals[j]]);
    }
}

TEST_CASE("knn features") {
    DistanceTable t{1, 3, {5, 2, 9}};
    auto all = knn_features(t, {true, true, true}, 2);
    CHECK(std::vector<double>(all.rows.begin(), all.rows.end()) == std::vector<double>{2, 5});
    auto one = knn_features(t, {true, false, false}, 2);
    CHECK(std::vector<double>(one.rows.begin(), one.rows.end()) == std::vector<double>{5, 0});
    auto none = knn_features(t, {false, false, false}, 2);
    CHECK(none.rows == std::vector<double>{0, 0});
    CHECK_THROWS_AS(knn_features(t, {true, true, true}, 0), GraphError);
    CHECK_THROWS_AS(knn_features(t, {true, true}, 1), GraphError);
}

TEST_CASE("knn features properties on random tables") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::bernoulli_distribution coin(0.6);
    for (int trial = 0; trial < 200; ++trial) {
        int rows = 1 + trial % 7, cols = 1 + trial % 6;
        DistanceTable t{rows, cols, {}};
        for (int i = 0; i < rows * cols; ++i) t.data.push_back(u(rng));
        std::vector<bool> mask(cols);
        for (int j = 0; j < cols; ++j) mask[j] = coin(rng);
        int active = static_cast<int>(std::count(mask.begin(), mask.end(), true));

        auto k1 = knn_features(t, mask, 1);
        for (int v = 0; v < rows; ++v) {
            double expect = active ? oracle::kInf : 0.0;
            for (int j = 0; j < cols; ++j)
                if (mask[j]) expect = std::min(expect, t.at(v, j));
            CHECK(k1.row(v)[0] == expect);
        }

        const int k = 3;
        auto f = knn_features(t, mask, k);
        for (int v = 0; v < rows; ++v) {
            auto row = f.row(v);
            std::vector<double> expect;
            for (int j = 0; j < cols; ++j)
                if (mask[j]) expect.push_back(t.at(v, j));
            std::sort(expect.begin(), expect.end());
            expect.resize(k, 0.0);
            CHECK(std::vector<double>(row.begin(), row.end()) == expect);
        }

        // Dropping a terminal never lowers the i-th retained entry.
        for (int drop = 0; drop < cols; ++drop) {
            if (!mask[drop]) continue;
            auto smaller = mask;
            smaller[drop] = false;
            auto g = knn_features(t, smaller, k);
            int remaining = active - 1;
            for (int v = 0; v < rows; ++v)
                for (int i = 0; i < std::min(k, remaining); ++i) CHECK(g.row(v)[i] >= f.row(v)[i]);
        }
    }
}

TEST_CASE("normalization") {
    DistanceTable t{2, 2, {2, 5, 0, 0}};
    auto f = normalize_features(knn_features(t, {true, true}, 2), 5.0);
    CHECK(f.row(0)[0] == doctest::Approx(0.4));
    CHECK(f.row(0)[1] == doctest::Approx(1.0));
    CHECK(f.row(1)[0] == 0.0);
    CHECK(f.row(1)[1] == 0.0);
    CHECK_THROWS_AS(normalize_features(f, 0.0), GraphError);
    CHECK_THROWS_AS(normalize_features(f, -1.0), GraphError);
    CHECK(feature_scale(DistanceTable{1, 1, {0}}) == 1.0);
    CHECK(feature_scale(DistanceTable{1, 2, {3, oracle::kInf}}) == 3.0);
}

TEST_CASE("normalized features stay in [0,1] and keep row order") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        auto inst = oracle::random_instance(15, 4, 0.2, 5, rng);
        auto table = terminal_distance_matrix(inst);
        double scale = feature_scale(table);
        std::vector<bool> mask(table.terminals, true);
        auto raw = knn_features(table, mask, 3);
        auto norm = normalize_features(raw, scale);
        for (std::size_t i = 0; i < norm.rows.size(); ++i) {
            CHECK(norm.rows[i] >= 0.0);
            CHECK(norm.rows[i] <= 1.0);
        }
        for (Vertex v = 0; v < table.vertices; ++v)
            for (int i = 0; i + 1 < 3; ++i)
                CHECK((raw.row(v)[i] <= raw.row(v)[i + 1]) == (norm.row(v)[i] <= norm.row(v)[i + 1]));
    }
}
