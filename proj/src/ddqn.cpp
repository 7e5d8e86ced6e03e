#include "steinrl/ddqn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "steinrl/steinlib.hpp"

namespace steinrl {

QMap q_values(const Snapshot& snapshot, const QNetParams& params) {
    if (snapshot.frontier.empty()) throw EnvError("q_values: empty frontier");
    auto input = snapshot.input();
    auto pass = forward(input, params);
    QMap out;
    for (Vertex v : snapshot.frontier) out.emplace(v, pass.q(params, v));
    return out;
}

QMap q_values(const EpisodeState& state, const QNetParams& params) {
    if (state.done()) throw EnvError("q_values: episode already finished");
    return q_values(state.snapshot(), params);
}

Vertex argmax(const QMap& q) {
    if (q.empty()) throw EnvError("argmax over an empty frontier");
    auto best = q.begin();
    for (auto it = std::next(q.begin()); it != q.end(); ++it) {
        if (it->second > best->second) best = it;
    }
    return best->first;
}

Vertex select_action(const QMap& q, double epsilon, Rng& rng) {
    if (q.empty()) throw EnvError("select_action: empty frontier");
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
        std::uniform_int_distribution<std::size_t> pick(0, q.size() - 1);
        return std::next(q.begin(), static_cast<std::ptrdiff_t>(pick(rng)))->first;
    }
    return argmax(q);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
    } else {
        items_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch, Rng& rng) const {
    const std::size_t n = items_.size();
    if (batch > n) throw std::invalid_argument("replay buffer holds fewer transitions than the batch");
    std::vector<std::size_t> out;
    out.reserve(batch);
    for (std::size_t j = n - batch; j < n; ++j) {
        std::uniform_int_distribution<std::size_t> pick(0, j);
        std::size_t t = pick(rng);
        if (std::find(out.begin(), out.end(), t) != out.end()) t = j;
        out.push_back(t);
    }
    return out;
}

void DdqnConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("invalid training config: ") + what);
    };
    require(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
    require(epsilon_start >= 0.0 && epsilon_start <= 1.0, "epsilon start must lie in [0, 1]");
    require(epsilon_end >= 0.0 && epsilon_end <= 1.0, "epsilon end must lie in [0, 1]");
    require(epsilon_decay_fraction >= 0.0 && epsilon_decay_fraction <= 1.0,
            "epsilon decay fraction must lie in [0, 1]");
    require(batch > 0, "batch must be positive");
    require(learning_rate > 0.0, "learning rate must be positive");
    require(target_sync > 0, "target sync period must be positive");
    require(replay_capacity >= batch, "replay capacity must hold a batch");
    require(rounds >= 0, "rounds must be non-negative");
    require(k > 0, "K must be positive");
    require(p > 0, "embedding width must be positive");
    require(validate_every > 0, "validation period must be positive");
    require(!reward_bonus || *reward_bonus >= 0.0, "reward bonus must be non-negative");
}

double DdqnConfig::epsilon_at(int round) const {
    double horizon = epsilon_decay_fraction * rounds;
    if (horizon <= 0.0) return epsilon_end;
    double t = std::min(1.0, round / horizon);
    return epsilon_start + (epsilon_end - epsilon_start) * t;
}

nlohmann::json DdqnConfig::to_json() const {
    nlohmann::json j = {{"gamma", gamma},
                        {"epsilon_start", epsilon_start},
                        {"epsilon_end", epsilon_end},
                        {"epsilon_decay_fraction", epsilon_decay_fraction},
                        {"batch", batch},
                        {"learning_rate", learning_rate},
                        {"target_sync", target_sync},
                        {"replay_capacity", replay_capacity},
                        {"warmup_batches", warmup_batches},
                        {"rounds", rounds},
                        {"k", k},
                        {"p", p},
                        {"processor", processor == Processor::Mlp ? "mlp" : "message_passing"},
                        {"validate_every", validate_every},
                        {"seed", seed}};
    j["reward_bonus"] = reward_bonus ? nlohmann::json(*reward_bonus) : nlohmann::json(nullptr);
    return j;
}

DdqnConfig DdqnConfig::from_json(const nlohmann::json& j) {
    DdqnConfig c;
    c.gamma = j.value("gamma", c.gamma);
    c.epsilon_start = j.value("epsilon_start", c.epsilon_start);
    c.epsilon_end = j.value("epsilon_end", c.epsilon_end);
    c.epsilon_decay_fraction = j.value("epsilon_decay_fraction", c.epsilon_decay_fraction);
    c.batch = j.value("batch", c.batch);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.target_sync = j.value("target_sync", c.target_sync);
    c.replay_capacity = j.value("replay_capacity", c.replay_capacity);
    c.warmup_batches = j.value("warmup_batches", c.warmup_batches);
    c.rounds = j.value("rounds", c.rounds);
    c.k = j.value("k", c.k);
    c.p = j.value("p", c.p);
    c.processor = j.value("processor", std::string("message_passing")) == "mlp"
                      ? Processor::Mlp
                      : Processor::MessagePassing;
    c.validate_every = j.value("validate_every", c.validate_every);
    c.seed = j.value("seed", c.seed);
    if (j.contains("reward_bonus") && !j["reward_bonus"].is_null()) {
        c.reward_bonus = j["reward_bonus"].get<double>();
    }
    c.validate();
    return c;
}

double ddqn_target(const Transition& t, const QNetParams& env_params,
                   const QNetParams& target_params, double gamma) {
    if (t.done || gamma == 0.0) return t.reward;
    if (t.next.frontier.empty()) {
        throw EnvError("ddqn_target: non-terminal transition with an empty next frontier");
    }
    Vertex chosen = argmax(q_values(t.next, env_params));
    auto pass = forward(t.next.input(), target_params);
    return t.reward + gamma * pass.q(target_params, chosen);
}

double train_step(const ReplayBuffer& buffer, QNetParams& env_params,
                  const QNetParams& target_params, const DdqnConfig& config, Rng& rng) {
    if (buffer.size() < config.batch) {
        throw std::invalid_argument("train_step: replay buffer holds fewer transitions than a batch");
    }
    auto indices = buffer.sample_indices(config.batch, rng);
    auto gradient = QNetParams::zeros(env_params.p, env_params.k, env_params.processor);
    const double inv_batch = 1.0 / static_cast<double>(config.batch);
    double loss = 0.0;
    for (auto i : indices) {
        const auto& t = buffer[i];
        double y = ddqn_target(t, env_params, target_params, config.gamma);
        auto input = t.state.input();
        auto pass = forward(input, env_params);
        double residual = y - pass.q(env_params, t.action);
        loss += residual * residual * inv_batch;
        accumulate_q_gradient(env_params, input, pass, t.action, -2.0 * residual * inv_batch,
                              gradient);
    }
    sgd_step(env_params, gradient, config.learning_rate);
    return loss;
}

Trainer::Trainer(QNetParams initial, const DdqnConfig& config, std::uint64_t seed)
    : config_(config),
      env_(std::move(initial)),
      target_(sync_target(env_)),
      buffer_(config.replay_capacity),
      rng_(seed) {
    config_.k = env_.k;
    config_.p = env_.p;
    config_.validate();
}

Trainer::Episode Trainer::run_episode(const ContextPtr& context, double epsilon) {
    Episode ep;
    auto state = reset(context, config_.k, rng_);
    auto snap = state.snapshot();
    double loss_sum = 0.0;
    int trained = 0;
    const std::size_t warmup = std::max(config_.warmup_batches * config_.batch, config_.batch);
    while (!state.done()) {
        Vertex action = select_action(q_values(snap, env_), epsilon, rng_);
        double reward = step(state, action);
        auto next = state.snapshot();
        buffer_.push({std::move(snap), action, reward, next, state.done()});
        snap = std::move(next);
        ++ep.steps;
        if (buffer_.size() >= warmup) {
            loss_sum += train_step(buffer_, env_, target_, config_, rng_);
            ++trained;
            if (++train_steps_ % config_.target_sync == 0) {
                target_ = sync_target(env_);
                ++syncs_;
            }
        }
    }
    ep.edges = state.chosen_edges();
    ep.cost = state.cost();
    ep.mean_loss = trained > 0 ? loss_sum / trained : std::numeric_limits<double>::quiet_NaN();
    return ep;
}

SteinerTree greedy_rollout(const ContextPtr& context, const QNetParams& params) {
    const auto& instance = context->instance;
    std::optional<SteinerTree> best;
    for (Vertex start : instance.terminals) {
        auto state = reset_at(context, params.k, start);
        while (!state.done()) step(state, argmax(q_values(state, params)));
        auto tree = prune(instance, verify_tree(instance, state.chosen_edges()));
        if (!best || tree.cost < best->cost) best = std::move(tree);
    }
    return *best;
}

ValidationSet ValidationSet::build(const std::vector<StpInstance>& instances,
                                   const DdqnConfig& config) {
    ValidationSet set;
    for (const auto& inst : instances) {
        set.classic_costs.push_back(kmb(inst).cost);
        set.contexts.push_back(InstanceContext::make(inst, config.reward_bonus));
    }
    return set;
}

double ValidationSet::mean_gain(const QNetParams& params) const {
    if (contexts.empty()) throw std::invalid_argument("empty validation set");
    double sum = 0.0;
    for (std::size_t i = 0; i < contexts.size(); ++i) {
        sum += greedy_rollout(contexts[i], params).cost / classic_costs[i];
    }
    return sum / static_cast<double>(contexts.size());
}

TrainResult train(const InstanceStream& stream, const ValidationSet& validation,
                  const DdqnConfig& config, const std::function<void(const CurvePoint&)>& on_round) {
    config.validate();
    auto initial = QNetParams::initialize(config.p, config.k, config.seed, config.processor);
    Trainer trainer(initial, config, config.seed ^ 0x9E3779B97F4A7C15ULL);

    TrainResult result{initial, initial, {}, std::nullopt, 0, 0};
    if (!validation.empty()) result.best_gain = validation.mean_gain(initial);

    for (int round = 0; round < config.rounds; ++round) {
        auto context = InstanceContext::make(stream(round), config.reward_bonus);
        double epsilon = config.epsilon_at(round);
        auto ep = trainer.run_episode(context, epsilon);

        CurvePoint point{round, ep.cost, ep.mean_loss, epsilon, std::nullopt};
        bool last = round + 1 == config.rounds;
        if (!validation.empty() && ((round + 1) % config.validate_every == 0 || last)) {
            double gain = validation.mean_gain(trainer.params());
            point.validation_gain = gain;
            if (gain < *result.best_gain) {
                result.best_gain = gain;
                result.best_params = trainer.params();
            }
        }
        result.curve.push_back(point);
        if (on_round) on_round(point);
    }
    result.final_params = trainer.params();
    if (validation.empty()) result.best_params = result.final_params;
    result.train_steps = trainer.train_steps();
    result.syncs = trainer.syncs();
    return result;
}

std::string curve_csv(const std::vector<CurvePoint>& curve) {
    std::ostringstream out;
    out << "round,episode_cost,mean_loss,epsilon,gain_on_validation\n";
    for (const auto& p : curve) {
        out << p.round << "," << format_real(p.episode_cost) << ","
            << (std::isnan(p.mean_loss) ? std::string{} : format_real(p.mean_loss)) << ","
            << format_real(p.epsilon) << ","
            << (p.validation_gain ? format_real(*p.validation_gain) : std::string{}) << "\n";
    }
    return out.str();
}

ActiveSearchResult active_search(const ContextPtr& context, const QNetParams& params,
                                 int budget_rounds, const DdqnConfig& config, int rollout_every) {
    const auto& instance = context->instance;
    ActiveSearchResult result{greedy_rollout(context, params), params, {}};
    if (budget_rounds <= 0) return result;

    Trainer trainer(params, config, config.seed ^ 0xA5A5A5A5A5A5A5A5ULL);
    for (int round = 0; round < budget_rounds; ++round) {
        auto ep = trainer.run_episode(context, config.epsilon_start);
        auto tree = prune(instance, verify_tree(instance, ep.edges));
        if (tree.cost < result.best.cost) result.best = std::move(tree);
        if (rollout_every > 0 && (round + 1) % rollout_every == 0) {
            auto greedy = greedy_rollout(context, trainer.params());
            if (greedy.cost < result.best.cost) result.best = std::move(greedy);
        }
        result.best_cost_curve.push_back(result.best.cost);
    }
    result.params = trainer.params();
    return result;
}

}  // namespace steinrl
