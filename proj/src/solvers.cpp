#include "steinrl/solvers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numeric>
#include <queue>
#include <tuple>

namespace steinrl {
namespace {

struct DisjointSets {
    std::vector<int> parent;
    explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

std::pair<Vertex, Vertex> ordered(Vertex a, Vertex b) { return {std::min(a, b), std::max(a, b)}; }

std::vector<std::pair<Vertex, Vertex>> edge_pairs(const WeightedGraph& graph,
                                                  const std::vector<std::size_t>& indices) {
    std::vector<std::pair<Vertex, Vertex>> out;
    out.reserve(indices.size());
    for (auto idx : indices) {
        const auto& e = graph.edge(idx);
        out.push_back(ordered(e.u, e.v));
    }
    return out;
}

}  // namespace

std::vector<std::size_t> minimum_spanning_edges(const WeightedGraph& graph,
                                                std::vector<std::size_t> candidates) {
    auto key = [&](std::size_t idx) {
        const auto& e = graph.edge(idx);
        return std::make_tuple(e.w, std::min(e.u, e.v), std::max(e.u, e.v));
    };
    std::sort(candidates.begin(), candidates.end(),
              [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    DisjointSets sets(graph.vertex_count());
    std::vector<std::size_t> chosen;
    for (auto idx : candidates) {
        const auto& e = graph.edge(idx);
        if (sets.unite(e.u, e.v)) chosen.push_back(idx);
    }
    return chosen;
}

SteinerTree verify_tree(const StpInstance& instance,
                        const std::vector<std::pair<Vertex, Vertex>>& edges) {
    const auto& graph = instance.graph;
    SteinerTree tree;
    DisjointSets sets(graph.vertex_count());
    std::vector<bool> covered(static_cast<std::size_t>(graph.vertex_count()), false);

    for (auto [a, b] : edges) {
        auto idx = (graph.has_vertex(a) && graph.has_vertex(b)) ? graph.find_edge(a, b)
                                                                 : std::nullopt;
        if (!idx) {
            throw TreeError(TreeError::Kind::NotAnEdge, "(" + std::to_string(a) + ", " +
                                                            std::to_string(b) +
                                                            ") is not a graph edge");
        }
        tree.edges.push_back(ordered(a, b));
        tree.cost += graph.edge(*idx).w;
        covered[a] = covered[b] = true;
    }
    std::sort(tree.edges.begin(), tree.edges.end());
    if (std::adjacent_find(tree.edges.begin(), tree.edges.end()) != tree.edges.end()) {
        throw TreeError(TreeError::Kind::DuplicateEdge, "edge listed twice");
    }
    for (auto [a, b] : tree.edges) {
        if (!sets.unite(a, b)) {
            throw TreeError(TreeError::Kind::Cycle, "cycle through edge (" + std::to_string(a) +
                                                        ", " + std::to_string(b) + ")");
        }
    }
    if (tree.edges.empty() && instance.terminals.size() == 1) {
        covered[instance.terminals.front()] = true;
    }
    for (Vertex t : instance.terminals) {
        if (!covered[t]) {
            throw TreeError(TreeError::Kind::TerminalUncovered,
                            "terminal " + std::to_string(t) + " uncovered");
        }
    }
    int root = -1;
    for (Vertex v = 0; v < graph.vertex_count(); ++v) {
        if (!covered[v]) continue;
        tree.covered.push_back(v);
        if (root < 0) {
            root = sets.find(v);
        } else if (sets.find(v) != root) {
            throw TreeError(TreeError::Kind::Disconnected, "edge set is not connected");
        }
    }
    return tree;
}

SteinerTree prune(const StpInstance& instance, const SteinerTree& tree) {
    const int n = instance.graph.vertex_count();
    auto is_terminal = instance.terminal_flags();
    std::vector<std::vector<Vertex>> adj(static_cast<std::size_t>(n));
    for (auto [a, b] : tree.edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<int> degree(static_cast<std::size_t>(n));
    std::vector<bool> removed(static_cast<std::size_t>(n), false);
    std::vector<Vertex> leaves;
    for (Vertex v = 0; v < n; ++v) {
        degree[v] = static_cast<int>(adj[v].size());
        if (degree[v] == 1 && !is_terminal[v]) leaves.push_back(v);
    }
    while (!leaves.empty()) {
        Vertex v = leaves.back();
        leaves.pop_back();
        removed[v] = true;
        for (Vertex u : adj[v]) {
            if (removed[u]) continue;
            if (--degree[u] == 1 && !is_terminal[u]) leaves.push_back(u);
        }
    }
    std::vector<std::pair<Vertex, Vertex>> kept;
    for (auto e : tree.edges) {
        if (!removed[e.first] && !removed[e.second]) kept.push_back(e);
    }
    return verify_tree(instance, kept);
}

SteinerTree kmb(const StpInstance& instance) {
    const auto& graph = instance.graph;
    const auto& terms = instance.terminals;
    const std::size_t t = terms.size();
    if (t <= 1) return verify_tree(instance, {});

    std::vector<ShortestPathTree> trees;
    trees.reserve(t);
    for (Vertex s : terms) trees.push_back(shortest_path_tree(graph, s));

    // MST of the metric closure, Prim over terminal indices.
    std::vector<bool> in_tree(t, false);
    std::vector<double> best(t, kInfinity);
    std::vector<int> link(t, -1);
    best[0] = 0.0;
    std::vector<std::pair<int, int>> closure_edges;
    for (std::size_t round = 0; round < t; ++round) {
        int pick = -1;
        for (std::size_t j = 0; j < t; ++j) {
            if (in_tree[j]) continue;
            if (pick < 0 || best[j] < best[pick]) pick = static_cast<int>(j);
        }
        if (!std::isfinite(best[pick])) {
            throw SolverError("terminals are not mutually reachable");
        }
        in_tree[pick] = true;
        if (link[pick] >= 0) closure_edges.emplace_back(link[pick], pick);
        for (std::size_t j = 0; j < t; ++j) {
            if (in_tree[j]) continue;
            double d = trees[pick].dist[terms[j]];
            // Ties resolved toward the lower terminal endpoint.
            if (d < best[j] || (d == best[j] && link[j] >= 0 &&
                                ordered(terms[pick], terms[j]) < ordered(terms[link[j]], terms[j]))) {
                best[j] = d;
                link[j] = pick;
            }
        }
    }

    std::vector<bool> used(graph.edge_count(), false);
    std::vector<std::size_t> expanded;
    for (auto [a, b] : closure_edges) {
        const auto& spt = trees[a];
        for (Vertex v = terms[b]; v != terms[a]; v = spt.parent[v]) {
            auto idx = *graph.find_edge(v, spt.parent[v]);
            if (!used[idx]) {
                used[idx] = true;
                expanded.push_back(idx);
            }
        }
    }
    auto mst = minimum_spanning_edges(graph, std::move(expanded));
    return prune(instance, verify_tree(instance, edge_pairs(graph, mst)));
}

SteinerTree dreyfus_wagner(const StpInstance& instance, int terminal_cap) {
    const auto& graph = instance.graph;
    const auto& terms = instance.terminals;
    const int k = static_cast<int>(terms.size());
    if (k > terminal_cap) {
        throw SolverError("terminal count " + std::to_string(k) + " exceeds exact-solver cap " +
                          std::to_string(terminal_cap));
    }
    if (k <= 1) return verify_tree(instance, {});

    const int n = graph.vertex_count();
    const int m = k - 1;  // subsets over all terminals but the last, which is the root
    const std::size_t layers = std::size_t{1} << m;
    const std::size_t full = layers - 1;
    auto cell = [n](std::size_t mask, Vertex v) { return mask * static_cast<std::size_t>(n) + v; };

    std::vector<double> cost(layers * n, kInfinity);
    // pred >= 0: reached over edge (pred, v); split > 0: merge of split and mask^split.
    std::vector<Vertex> pred(layers * n, -1);
    std::vector<std::uint32_t> split(layers * n, 0);

    using Item = std::pair<double, Vertex>;
    for (std::size_t mask = 1; mask <= full; ++mask) {
        if ((mask & (mask - 1)) == 0) {
            int i = std::countr_zero(mask);
            cost[cell(mask, terms[i])] = 0.0;
        } else {
            // Submasks containing the lowest set bit; each unordered split seen once.
            std::size_t low = mask & (~mask + 1);
            std::size_t rest = mask ^ low;
            for (std::size_t sub = rest;; sub = (sub - 1) & rest) {
                std::size_t a = sub | low;
                if (a != mask) {
                    std::size_t b = mask ^ a;
                    for (Vertex v = 0; v < n; ++v) {
                        double c = cost[cell(a, v)] + cost[cell(b, v)];
                        if (c < cost[cell(mask, v)]) {
                            cost[cell(mask, v)] = c;
                            split[cell(mask, v)] = static_cast<std::uint32_t>(a);
                        }
                    }
                }
                if (sub == 0) break;
            }
        }
        std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
        for (Vertex v = 0; v < n; ++v) {
            if (std::isfinite(cost[cell(mask, v)])) queue.emplace(cost[cell(mask, v)], v);
        }
        std::vector<bool> settled(static_cast<std::size_t>(n), false);
        while (!queue.empty()) {
            auto [d, v] = queue.top();
            queue.pop();
            if (settled[v] || d > cost[cell(mask, v)]) continue;
            settled[v] = true;
            for (const auto& inc : graph.incident(v)) {
                Vertex u = inc.neighbor;
                double nd = d + graph.edge(inc.edge).w;
                if (nd < cost[cell(mask, u)]) {
                    cost[cell(mask, u)] = nd;
                    pred[cell(mask, u)] = v;
                    split[cell(mask, u)] = 0;
                    queue.emplace(nd, u);
                }
            }
        }
    }

    const Vertex root = terms[k - 1];
    if (!std::isfinite(cost[cell(full, root)])) {
        throw SolverError("terminals are not mutually reachable");
    }

    std::vector<std::pair<Vertex, Vertex>> edges;
    std::vector<std::pair<std::size_t, Vertex>> work{{full, root}};
    while (!work.empty()) {
        auto [mask, v] = work.back();
        work.pop_back();
        auto c = cell(mask, v);
        if (pred[c] >= 0) {
            edges.push_back(ordered(pred[c], v));
            work.emplace_back(mask, pred[c]);
        } else if (split[c] != 0) {
            work.emplace_back(split[c], v);
            work.emplace_back(mask ^ split[c], v);
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return verify_tree(instance, edges);
}

}  // namespace steinrl
