#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace steinrl {

using Vertex = int;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

class GraphError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Edge {
    Vertex u = 0;
    Vertex v = 0;
    double w = 0.0;

    Vertex other(Vertex x) const { return x == u ? v : u; }
    bool operator==(const Edge&) const = default;
};

struct Incidence {
    Vertex neighbor;
    std::size_t edge;
};

/// Undirected graph with strictly positive edge weights.
///
/// Vertices are 0..vertex_count()-1. Self-loops and parallel edges are
/// rejected on insertion, so every unordered pair maps to at most one edge.
class WeightedGraph {
public:
    WeightedGraph() = default;
    explicit WeightedGraph(int vertex_count);

    /// Returns the index of the new edge.
    std::size_t add_edge(Vertex u, Vertex v, double w);

    int vertex_count() const { return static_cast<int>(adjacency_.size()); }
    std::size_t edge_count() const { return edges_.size(); }

    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(std::size_t index) const { return edges_.at(index); }
    std::span<const Incidence> incident(Vertex v) const;
    int degree(Vertex v) const { return static_cast<int>(incident(v).size()); }

    std::optional<std::size_t> find_edge(Vertex u, Vertex v) const;
    bool has_vertex(Vertex v) const { return v >= 0 && v < vertex_count(); }

    double total_weight() const;

    bool operator==(const WeightedGraph& other) const;

private:
    static std::uint64_t pair_key(Vertex u, Vertex v);

    std::vector<Edge> edges_;
    std::vector<std::vector<Incidence>> adjacency_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

/// Graph plus terminal set, with optional reference values.
struct StpInstance {
    std::string name;
    WeightedGraph graph;
    std::vector<Vertex> terminals;  // sorted, unique
    std::optional<double> known_opt;
    std::optional<double> bound;

    /// Sorts and deduplicates terminals, then checks that they are in range
    /// and mutually reachable. Throws GraphError otherwise.
    void validate();

    std::vector<bool> terminal_flags() const;
    bool operator==(const StpInstance&) const = default;
};

/// Dijkstra distances from `source`; unreachable vertices get kInfinity.
std::vector<double> shortest_paths(const WeightedGraph& graph, Vertex source);

/// Dijkstra that also records the predecessor of each vertex on its chosen
/// shortest path (-1 for the source and unreachable vertices). Among equal
/// distances the lower-id predecessor wins.
struct ShortestPathTree {
    std::vector<double> dist;
    std::vector<Vertex> parent;
};
ShortestPathTree shortest_path_tree(const WeightedGraph& graph, Vertex source);

/// Vertex ids reachable from `source`, as a mask.
std::vector<bool> reachable_from(const WeightedGraph& graph, Vertex source);

/// |V| x |T| table of vertex-to-terminal distances, row-major.
struct DistanceTable {
    int vertices = 0;
    int terminals = 0;
    std::vector<double> data;

    double at(Vertex v, int terminal_index) const {
        return data[static_cast<std::size_t>(v) * terminals + terminal_index];
    }
    std::span<const double> row(Vertex v) const {
        return {data.data() + static_cast<std::size_t>(v) * terminals,
                static_cast<std::size_t>(terminals)};
    }
    /// Vertices with every terminal at finite distance.
    bool is_candidate(Vertex v) const;
    /// Largest finite entry; 0 when every entry is 0 or infinite.
    double max_finite() const;
};

DistanceTable terminal_distance_matrix(const StpInstance& instance);

/// K-nearest active terminal distances per vertex, ascending and zero-filled.
struct TerminalFeatures {
    int k = 0;
    int vertices = 0;
    std::vector<double> rows;  // vertices * k, row-major
    std::vector<bool> active_mask;

    std::span<const double> row(Vertex v) const {
        return {rows.data() + static_cast<std::size_t>(v) * k, static_cast<std::size_t>(k)};
    }
    double row_sum(Vertex v) const;
};

/// Infinite distances (vertices outside the terminal component) are never
/// selected; such rows are filled from the finite entries only.
TerminalFeatures knn_features(const DistanceTable& table, const std::vector<bool>& active_mask,
                              int k);

TerminalFeatures normalize_features(TerminalFeatures features, double scale);

/// Fixed per-instance normalization: the largest finite entry of the full
/// table, or 1 when that is 0.
double feature_scale(const DistanceTable& table);

}  // namespace steinrl
