#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "steinrl/graph.hpp"

namespace steinrl {

/// A verified Steiner tree. Edges are stored as (lower, higher) vertex pairs
/// in ascending order.
struct SteinerTree {
    std::vector<std::pair<Vertex, Vertex>> edges;
    double cost = 0.0;
    std::vector<Vertex> covered;  // sorted

    bool operator==(const SteinerTree&) const = default;
};

class TreeError : public std::runtime_error {
public:
    enum class Kind { NotAnEdge, DuplicateEdge, Cycle, TerminalUncovered, Disconnected };

    TreeError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Checks that `edges` is a tree of graph edges covering every terminal and
/// returns it in canonical form with its cost. Throws TreeError.
SteinerTree verify_tree(const StpInstance& instance,
                        const std::vector<std::pair<Vertex, Vertex>>& edges);

/// Repeatedly removes non-terminal leaves.
SteinerTree prune(const StpInstance& instance, const SteinerTree& tree);

/// Kou-Markowsky-Berman 2-approximation.
SteinerTree kmb(const StpInstance& instance);

inline constexpr int kDefaultExactTerminalCap = 14;

/// Exact optimum by the subset dynamic program over terminals.
SteinerTree dreyfus_wagner(const StpInstance& instance, int terminal_cap = kDefaultExactTerminalCap);

/// Minimum spanning forest by Kruskal over the given edge indices, ordered
/// by (weight, lower endpoint, higher endpoint).
std::vector<std::size_t> minimum_spanning_edges(const WeightedGraph& graph,
                                                std::vector<std::size_t> candidates);

}  // namespace steinrl
