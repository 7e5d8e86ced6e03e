#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "steinrl/graph.hpp"
#include "steinrl/qnet.hpp"

namespace steinrl {

using Rng = std::mt19937_64;

class EnvError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Everything about an instance that episodes only read: the full distance
/// table, its normalization scale and the terminal reward bonus.
struct InstanceContext {
    StpInstance instance;
    DistanceTable distances;
    double scale = 1.0;
    double reward_bonus = 0.0;
    std::vector<int> terminal_index;  // vertex -> position in terminals, or -1

    /// reward_bonus defaults to the mean edge weight.
    static std::shared_ptr<const InstanceContext> make(StpInstance instance,
                                                       std::optional<double> reward_bonus = {});

    bool is_terminal(Vertex v) const { return terminal_index[v] >= 0; }
    int vertex_count() const { return instance.graph.vertex_count(); }
};
using ContextPtr = std::shared_ptr<const InstanceContext>;

/// The part of an episode state a Transition keeps: solution bits and the
/// normalized feature rows, plus the shared instance context.
struct Snapshot {
    ContextPtr context;
    std::vector<std::uint8_t> in_solution;
    Matrix features;  // n x k, normalized
    std::vector<Vertex> frontier;
    bool done = false;

    NetInput input() const;
};

/// Partial solution of the greedy construction.
///
/// S grows from a start terminal by adding frontier vertices (neighbours of
/// S outside S), each joined by its lightest edge into S. Features are
/// recomputed whenever a terminal joins S.
class EpisodeState {
public:
    const InstanceContext& context() const { return *context_; }
    const ContextPtr& context_ptr() const { return context_; }

    const std::vector<Vertex>& order() const { return order_; }
    const std::vector<Vertex>& frontier() const { return frontier_; }
    bool in_solution(Vertex v) const { return in_solution_[v] != 0; }
    /// Vertex that `v` was attached to, -1 for the start vertex and outsiders.
    Vertex parent(Vertex v) const { return parent_[v]; }
    std::vector<std::pair<Vertex, Vertex>> chosen_edges() const;

    double cost() const { return cost_; }
    bool done() const { return remaining_terminals_ == 0; }
    int k() const { return features_.k; }
    const std::vector<bool>& active_mask() const { return features_.active_mask; }
    const TerminalFeatures& features() const { return features_; }

    /// Weight and S-side endpoint of the lightest edge joining frontier
    /// vertex `v` to S.
    std::pair<double, Vertex> link(Vertex v) const { return {link_weight_[v], link_from_[v]}; }

    NetInput net_input() const;
    Snapshot snapshot() const;

private:
    friend EpisodeState reset_at(ContextPtr context, int k, Vertex start);
    friend double step(EpisodeState& state, Vertex v);

    void add(Vertex v);
    void refresh_features();

    ContextPtr context_;
    std::vector<Vertex> order_;
    std::vector<std::uint8_t> in_solution_;
    std::vector<Vertex> parent_;
    std::vector<Vertex> frontier_;  // sorted
    std::vector<double> link_weight_;
    std::vector<Vertex> link_from_;
    double cost_ = 0.0;
    int remaining_terminals_ = 0;
    TerminalFeatures features_;
};

/// Starts at a uniformly drawn terminal.
EpisodeState reset(ContextPtr context, int k, Rng& rng);
EpisodeState reset_at(ContextPtr context, int k, Vertex start);

/// Adds frontier vertex `v` and returns the reward
///   -w_min - |x_v| (+ reward_bonus when v is a terminal),
/// where |x_v| is the sum of v's normalized feature row before the step.
double step(EpisodeState& state, Vertex v);

}  // namespace steinrl
