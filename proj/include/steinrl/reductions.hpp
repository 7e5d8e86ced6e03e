#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "steinrl/graph.hpp"
#include "steinrl/solvers.hpp"

namespace steinrl {

class ReductionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// CNF formula. Literals are DIMACS style: +v / -v with v in 1..variables.
struct Cnf {
    int variables = 0;
    std::vector<std::vector<int>> clauses;
};

Cnf parse_dimacs_cnf(std::string_view text);
std::string write_dimacs_cnf(const Cnf& cnf);
bool satisfies(const Cnf& cnf, const std::vector<bool>& assignment);

struct VertexCoverInstance {
    WeightedGraph graph;  // weights ignored
    int cover_size = 0;
};

/// DIMACS graph format: "p edge n m" then "e u v" lines (1-based).
WeightedGraph parse_dimacs_graph(std::string_view text);
std::string write_dimacs_graph(const WeightedGraph& graph);
bool is_vertex_cover(const WeightedGraph& graph, const std::vector<Vertex>& cover);

struct X3cInstance {
    int universe = 0;                       // multiple of 3
    std::vector<std::array<int, 3>> triples;  // 0-based elements
};

/// "p x3c <universe> <triples>" then one "u v w" line per triple (1-based).
X3cInstance parse_x3c(std::string_view text);
std::string write_x3c(const X3cInstance& x3c);
bool is_exact_cover(const X3cInstance& x3c, const std::vector<int>& chosen);

enum class SourceKind { Sat, VertexCover, ExactCover3 };
std::string_view source_kind_name(SourceKind kind);

/// Maps STP vertices back to source-problem objects.
///
/// Sat: primary[i] / secondary[i] are the positive / negative literal
/// vertices of variable i. VertexCover: primary[v] is the vertex node of
/// source vertex v, secondary holds the source edge endpoints pairwise.
/// ExactCover3: primary[j] is the node of triple j.
struct WitnessMap {
    SourceKind kind = SourceKind::Sat;
    std::vector<Vertex> primary;
    std::vector<Vertex> secondary;

    /// Sat: 0/1 value per variable. VertexCover: cover vertex ids.
    /// ExactCover3: chosen triple indices. Defined for every tree.
    std::vector<int> recover(const SteinerTree& tree) const;

    nlohmann::json to_json() const;
    static WitnessMap from_json(const nlohmann::json& j);
};

struct ReductionOutput {
    StpInstance instance;  // bound is set
    WitnessMap witness;
    nlohmann::json size_stats;

    /// {source_kind, bound, size_stats, seed}
    nlohmann::json metadata(std::uint64_t seed) const;
};

/// Layered variable chain with one clause terminal per clause. Clause edges
/// weigh variables+1, chain edges 1; bound = 2n + m(n+1).
ReductionOutput reduce_sat(const Cnf& cnf);

/// Complete graph over vertex nodes and edge terminals. Vertex-vertex and
/// incident vertex-edge pairs weigh 1, all other pairs |V|+|E|;
/// bound = |E| + k - 1.
ReductionOutput reduce_mvc(const VertexCoverInstance& mvc);

/// Root terminal joined to every triple node (weight 1); each triple node
/// joined to its three element terminals (weight q+1); bound = q + 3q(q+1).
ReductionOutput reduce_x3c(const X3cInstance& x3c);

}  // namespace steinrl
