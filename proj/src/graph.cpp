#include "steinrl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <utility>

namespace steinrl {

WeightedGraph::WeightedGraph(int vertex_count) {
    if (vertex_count < 0) {
        throw GraphError("negative vertex count");
    }
    adjacency_.resize(static_cast<std::size_t>(vertex_count));
}

std::uint64_t WeightedGraph::pair_key(Vertex u, Vertex v) {
    auto lo = static_cast<std::uint64_t>(std::min(u, v));
    auto hi = static_cast<std::uint64_t>(std::max(u, v));
    return (lo << 32) | hi;
}

std::size_t WeightedGraph::add_edge(Vertex u, Vertex v, double w) {
    if (!has_vertex(u) || !has_vertex(v)) {
        throw GraphError("edge endpoint out of range: (" + std::to_string(u) + ", " +
                         std::to_string(v) + ")");
    }
    if (u == v) {
        throw GraphError("self-loop at vertex " + std::to_string(u));
    }
    if (!(w > 0.0) || !std::isfinite(w)) {
        throw GraphError("edge weight must be positive and finite");
    }
    auto key = pair_key(u, v);
    if (index_.contains(key)) {
        throw GraphError("duplicate edge (" + std::to_string(u) + ", " + std::to_string(v) + ")");
    }
    std::size_t idx = edges_.size();
    edges_.push_back({u, v, w});
    adjacency_[u].push_back({v, idx});
    adjacency_[v].push_back({u, idx});
    index_.emplace(key, idx);
    return idx;
}

std::span<const Incidence> WeightedGraph::incident(Vertex v) const {
    if (!has_vertex(v)) {
        throw GraphError("vertex out of range: " + std::to_string(v));
    }
    return adjacency_[v];
}

std::optional<std::size_t> WeightedGraph::find_edge(Vertex u, Vertex v) const {
    auto it = index_.find(pair_key(u, v));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

double WeightedGraph::total_weight() const {
    double sum = 0.0;
    for (const auto& e : edges_) sum += e.w;
    return sum;
}

bool WeightedGraph::operator==(const WeightedGraph& other) const {
    return vertex_count() == other.vertex_count() && edges_ == other.edges_;
}

void StpInstance::validate() {
    std::sort(terminals.begin(), terminals.end());
    terminals.erase(std::unique(terminals.begin(), terminals.end()), terminals.end());
    if (terminals.empty()) {
        throw GraphError("instance has no terminals");
    }
    for (Vertex t : terminals) {
        if (!graph.has_vertex(t)) {
            throw GraphError("terminal out of range: " + std::to_string(t));
        }
    }
    auto reach = reachable_from(graph, terminals.front());
    for (Vertex t : terminals) {
        if (!reach[t]) {
            throw GraphError("terminal " + std::to_string(t) + " is not reachable from terminal " +
                             std::to_string(terminals.front()));
        }
    }
}

std::vector<bool> StpInstance::terminal_flags() const {
    std::vector<bool> flags(static_cast<std::size_t>(graph.vertex_count()), false);
    for (Vertex t : terminals) flags[t] = true;
    return flags;
}

ShortestPathTree shortest_path_tree(const WeightedGraph& graph, Vertex source) {
    if (!graph.has_vertex(source)) {
        throw GraphError("source vertex out of range: " + std::to_string(source));
    }
    const auto n = static_cast<std::size_t>(graph.vertex_count());
    ShortestPathTree out{std::vector<double>(n, kInfinity), std::vector<Vertex>(n, -1)};
    std::vector<bool> settled(n, false);

    using Item = std::pair<double, Vertex>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    out.dist[source] = 0.0;
    queue.emplace(0.0, source);
    while (!queue.empty()) {
        auto [d, v] = queue.top();
        queue.pop();
        if (settled[v]) continue;
        settled[v] = true;
        for (const auto& inc : graph.incident(v)) {
            Vertex u = inc.neighbor;
            if (settled[u]) continue;
            double nd = d + graph.edge(inc.edge).w;
            if (nd < out.dist[u] || (nd == out.dist[u] && v < out.parent[u])) {
                bool improved = nd < out.dist[u];
                out.dist[u] = nd;
                out.parent[u] = v;
                if (improved) queue.emplace(nd, u);
            }
        }
    }
    return out;
}

std::vector<double> shortest_paths(const WeightedGraph& graph, Vertex source) {
    return shortest_path_tree(graph, source).dist;
}

std::vector<bool> reachable_from(const WeightedGraph& graph, Vertex source) {
    std::vector<bool> seen(static_cast<std::size_t>(graph.vertex_count()), false);
    std::vector<Vertex> stack{source};
    seen[source] = true;
    while (!stack.empty()) {
        Vertex v = stack.back();
        stack.pop_back();
        for (const auto& inc : graph.incident(v)) {
            if (!seen[inc.neighbor]) {
                seen[inc.neighbor] = true;
                stack.push_back(inc.neighbor);
            }
        }
    }
    return seen;
}

bool DistanceTable::is_candidate(Vertex v) const {
    for (double d : row(v)) {
        if (!std::isfinite(d)) return false;
    }
    return true;
}

double DistanceTable::max_finite() const {
    double best = 0.0;
    for (double d : data) {
        if (std::isfinite(d)) best = std::max(best, d);
    }
    return best;
}

DistanceTable terminal_distance_matrix(const StpInstance& instance) {
    DistanceTable table;
    table.vertices = instance.graph.vertex_count();
    table.terminals = static_cast<int>(instance.terminals.size());
    table.data.assign(static_cast<std::size_t>(table.vertices) * table.terminals, kInfinity);
    for (int j = 0; j < table.terminals; ++j) {
        auto dist = shortest_paths(instance.graph, instance.terminals[j]);
        for (Vertex v = 0; v < table.vertices; ++v) {
            table.data[static_cast<std::size_t>(v) * table.terminals + j] = dist[v];
        }
    }
    return table;
}

double TerminalFeatures::row_sum(Vertex v) const {
    double sum = 0.0;
    for (double x : row(v)) sum += x;
    return sum;
}

TerminalFeatures knn_features(const DistanceTable& table, const std::vector<bool>& active_mask,
                              int k) {
    if (k < 1) {
        throw GraphError("K must be at least 1");
    }
    if (active_mask.size() != static_cast<std::size_t>(table.terminals)) {
        throw GraphError("active mask size does not match terminal count");
    }
    TerminalFeatures out;
    out.k = k;
    out.vertices = table.vertices;
    out.active_mask = active_mask;
    out.rows.assign(static_cast<std::size_t>(table.vertices) * k, 0.0);

    std::vector<double> scratch;
    scratch.reserve(static_cast<std::size_t>(table.terminals));
    for (Vertex v = 0; v < table.vertices; ++v) {
        scratch.clear();
        auto row = table.row(v);
        for (int j = 0; j < table.terminals; ++j) {
            if (active_mask[j] && std::isfinite(row[j])) scratch.push_back(row[j]);
        }
        auto take = std::min<std::size_t>(scratch.size(), static_cast<std::size_t>(k));
        std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(take),
                          scratch.end());
        std::copy_n(scratch.begin(), take, out.rows.begin() + static_cast<std::ptrdiff_t>(v) * k);
    }
    return out;
}

TerminalFeatures normalize_features(TerminalFeatures features, double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw GraphError("normalization scale must be positive and finite");
    }
    for (double& x : features.rows) x /= scale;
    return features;
}

double feature_scale(const DistanceTable& table) {
    double m = table.max_finite();
    return m > 0.0 ? m : 1.0;
}

}  // namespace steinrl
