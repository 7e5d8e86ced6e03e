#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "steinrl/env.hpp"
#include "steinrl/qnet.hpp"
#include "steinrl/solvers.hpp"

namespace steinrl {

using QMap = std::map<Vertex, double>;

/// Q for every frontier vertex of a non-terminal state.
QMap q_values(const EpisodeState& state, const QNetParams& params);
QMap q_values(const Snapshot& snapshot, const QNetParams& params);

/// Highest Q, ties to the lowest vertex id.
Vertex argmax(const QMap& q);

/// Epsilon-greedy: a uniform frontier vertex with probability epsilon,
/// otherwise argmax(q). One uniform draw decides, a second picks the vertex.
Vertex select_action(const QMap& q, double epsilon, Rng& rng);

struct Transition {
    Snapshot state;
    Vertex action = -1;
    double reward = 0.0;
    Snapshot next;
    bool done = false;
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& operator[](std::size_t i) const { return items_[i]; }

    /// Indices drawn uniformly without replacement (Floyd's algorithm).
    std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> items_;
};

struct DdqnConfig {
    double gamma = 0.2;
    double epsilon_start = 0.1;
    double epsilon_end = 0.0;
    double epsilon_decay_fraction = 0.8;  // of `rounds`
    std::size_t batch = 16;
    double learning_rate = 1e-4;
    std::size_t target_sync = 100;  // training steps
    std::size_t replay_capacity = 50'000;
    std::size_t warmup_batches = 10;
    int rounds = 6000;
    int k = 2;
    int p = 64;
    Processor processor = Processor::MessagePassing;
    std::optional<double> reward_bonus;  // mean edge weight when unset
    int validate_every = 500;
    std::uint64_t seed = 1;

    void validate() const;
    double epsilon_at(int round) const;

    nlohmann::json to_json() const;
    static DdqnConfig from_json(const nlohmann::json& j);
};

/// Double-Q target: r when done, otherwise
/// r + gamma * Q_target(next, argmax_v Q_env(next, v)).
double ddqn_target(const Transition& t, const QNetParams& env_params,
                   const QNetParams& target_params, double gamma);

/// One SGD step on the mean squared TD error of a uniformly sampled batch.
/// Returns the mean loss before the update.
double train_step(const ReplayBuffer& buffer, QNetParams& env_params,
                  const QNetParams& target_params, const DdqnConfig& config, Rng& rng);

/// Deep snapshot of the online network.
inline QNetParams sync_target(const QNetParams& env_params) { return env_params; }

/// Owns the online and target networks and the replay memory.
class Trainer {
public:
    Trainer(QNetParams initial, const DdqnConfig& config, std::uint64_t seed);

    /// Plays one epsilon-greedy episode, training after every step once the
    /// buffer holds warmup_batches * batch transitions. Returns the unpruned
    /// episode tree and the mean loss over the steps that trained (NaN if none).
    struct Episode {
        std::vector<std::pair<Vertex, Vertex>> edges;
        double cost = 0.0;
        double mean_loss = 0.0;
        int steps = 0;
    };
    Episode run_episode(const ContextPtr& context, double epsilon);

    const QNetParams& params() const { return env_; }
    const QNetParams& target() const { return target_; }
    std::size_t train_steps() const { return train_steps_; }
    std::size_t syncs() const { return syncs_; }
    const ReplayBuffer& buffer() const { return buffer_; }

private:
    DdqnConfig config_;
    QNetParams env_;
    QNetParams target_;
    ReplayBuffer buffer_;
    Rng rng_;
    std::size_t train_steps_ = 0;
    std::size_t syncs_ = 0;
};

/// Deterministic rollout from every terminal; the cheapest pruned tree wins
/// (earliest start on ties).
SteinerTree greedy_rollout(const ContextPtr& context, const QNetParams& params);

struct CurvePoint {
    int round = 0;
    double episode_cost = 0.0;
    double mean_loss = 0.0;
    double epsilon = 0.0;
    std::optional<double> validation_gain;
};

struct TrainResult {
    QNetParams best_params;   // best by validation Gain (final when no validation)
    QNetParams final_params;
    std::vector<CurvePoint> curve;
    std::optional<double> best_gain;
    std::size_t train_steps = 0;
    std::size_t syncs = 0;
};

using InstanceStream = std::function<StpInstance(int round)>;

struct ValidationSet {
    std::vector<ContextPtr> contexts;
    std::vector<double> classic_costs;

    static ValidationSet build(const std::vector<StpInstance>& instances, const DdqnConfig& config);
    /// Mean greedy_rollout cost / KMB cost.
    double mean_gain(const QNetParams& params) const;
    bool empty() const { return contexts.empty(); }
};

/// Runs config.rounds episodes, one per streamed instance. Validation runs
/// every validate_every rounds and after the last round.
TrainResult train(const InstanceStream& stream, const ValidationSet& validation,
                  const DdqnConfig& config,
                  const std::function<void(const CurvePoint&)>& on_round = {});

/// Writes "round,episode_cost,mean_loss,epsilon,gain_on_validation" rows.
std::string curve_csv(const std::vector<CurvePoint>& curve);

struct ActiveSearchResult {
    SteinerTree best;
    QNetParams params;
    std::vector<double> best_cost_curve;  // best-so-far after each round
};

/// Per-instance adaptation: explores on this instance, trains a private copy
/// of the parameters, and keeps the cheapest verified tree seen. Never worse
/// than the initial greedy_rollout.
ActiveSearchResult active_search(const ContextPtr& context, const QNetParams& params,
                                 int budget_rounds, const DdqnConfig& config,
                                 int rollout_every = 20);

}  // namespace steinrl
