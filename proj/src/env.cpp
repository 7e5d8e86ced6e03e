#include "steinrl/env.hpp"

#include <algorithm>

namespace steinrl {

std::shared_ptr<const InstanceContext> InstanceContext::make(StpInstance instance,
                                                             std::optional<double> reward_bonus) {
    instance.validate();
    auto ctx = std::make_shared<InstanceContext>();
    ctx->distances = terminal_distance_matrix(instance);
    ctx->scale = feature_scale(ctx->distances);
    if (reward_bonus) {
        ctx->reward_bonus = *reward_bonus;
    } else {
        const auto m = instance.graph.edge_count();
        ctx->reward_bonus = m > 0 ? instance.graph.total_weight() / static_cast<double>(m) : 0.0;
    }
    ctx->terminal_index.assign(static_cast<std::size_t>(instance.graph.vertex_count()), -1);
    for (std::size_t j = 0; j < instance.terminals.size(); ++j) {
        ctx->terminal_index[instance.terminals[j]] = static_cast<int>(j);
    }
    ctx->instance = std::move(instance);
    return ctx;
}

NetInput Snapshot::input() const {
    const auto n = static_cast<Eigen::Index>(in_solution.size());
    NetInput in{&context->instance.graph, Matrix(n, 2), features};
    for (Eigen::Index v = 0; v < n; ++v) {
        in.state(v, 0) = in_solution[v];
        in.state(v, 1) = context->is_terminal(static_cast<Vertex>(v)) ? 1.0 : 0.0;
    }
    return in;
}

std::vector<std::pair<Vertex, Vertex>> EpisodeState::chosen_edges() const {
    std::vector<std::pair<Vertex, Vertex>> out;
    for (Vertex v : order_) {
        if (parent_[v] >= 0) out.emplace_back(std::min(v, parent_[v]), std::max(v, parent_[v]));
    }
    return out;
}

NetInput EpisodeState::net_input() const { return snapshot().input(); }

Snapshot EpisodeState::snapshot() const {
    const int n = context_->vertex_count();
    Snapshot s;
    s.context = context_;
    s.in_solution = in_solution_;
    s.features = Matrix(n, features_.k);
    std::copy(features_.rows.begin(), features_.rows.end(), s.features.data());
    s.frontier = frontier_;
    s.done = done();
    return s;
}

void EpisodeState::refresh_features() {
    features_ = normalize_features(knn_features(context_->distances, features_.active_mask, features_.k),
                                   context_->scale);
}

void EpisodeState::add(Vertex v) {
    const auto& graph = context_->instance.graph;
    in_solution_[v] = 1;
    order_.push_back(v);
    auto it = std::lower_bound(frontier_.begin(), frontier_.end(), v);
    if (it != frontier_.end() && *it == v) frontier_.erase(it);

    for (const auto& inc : graph.incident(v)) {
        Vertex u = inc.neighbor;
        if (in_solution_[u]) continue;
        double w = graph.edge(inc.edge).w;
        if (link_from_[u] < 0) {
            frontier_.insert(std::lower_bound(frontier_.begin(), frontier_.end(), u), u);
            link_weight_[u] = w;
            link_from_[u] = v;
        } else if (w < link_weight_[u] || (w == link_weight_[u] && v < link_from_[u])) {
            link_weight_[u] = w;
            link_from_[u] = v;
        }
    }
    int j = context_->terminal_index[v];
    if (j >= 0) {
        features_.active_mask[j] = false;
        --remaining_terminals_;
        refresh_features();
    }
}

EpisodeState reset_at(ContextPtr context, int k, Vertex start) {
    if (!context) throw EnvError("reset: null instance context");
    if (context->instance.terminals.empty()) throw EnvError("reset: instance has no terminals");
    if (!context->instance.graph.has_vertex(start) || !context->is_terminal(start)) {
        throw EnvError("reset: start vertex must be a terminal");
    }
    const auto n = static_cast<std::size_t>(context->vertex_count());
    EpisodeState s;
    s.context_ = std::move(context);
    s.in_solution_.assign(n, 0);
    s.parent_.assign(n, -1);
    s.link_weight_.assign(n, kInfinity);
    s.link_from_.assign(n, -1);
    s.remaining_terminals_ = static_cast<int>(s.context_->instance.terminals.size());
    s.features_.k = k;
    s.features_.active_mask.assign(s.context_->instance.terminals.size(), true);
    s.add(start);
    return s;
}

EpisodeState reset(ContextPtr context, int k, Rng& rng) {
    if (!context || context->instance.terminals.empty()) {
        throw EnvError("reset: instance has no terminals");
    }
    const auto& terms = context->instance.terminals;
    std::uniform_int_distribution<std::size_t> pick(0, terms.size() - 1);
    Vertex start = terms[pick(rng)];
    return reset_at(std::move(context), k, start);
}

double step(EpisodeState& state, Vertex v) {
    if (state.done()) throw EnvError("step: episode already finished");
    if (!std::binary_search(state.frontier_.begin(), state.frontier_.end(), v)) {
        throw EnvError("step: vertex " + std::to_string(v) + " is not in the frontier");
    }
    double x_sum = state.features_.row_sum(v);
    double w = state.link_weight_[v];
    state.parent_[v] = state.link_from_[v];
    state.cost_ += w;
    bool terminal = state.context_->is_terminal(v);
    state.add(v);
    return -w - x_sum + (terminal ? state.context_->reward_bonus : 0.0);
}

}  // namespace steinrl
