#pragma once

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "steinrl/env.hpp"
#include "steinrl/qnet.hpp"

namespace oracle {

struct GradFixture {
    steinrl::ContextPtr context;
    steinrl::Snapshot snapshot;
    steinrl::QNetParams params;
    steinrl::Vertex action = 0;
    double target = 0.0;
};

// Random instance, random mid-episode state, random parameters and target.
inline GradFixture make_grad_fixture(int p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    int n = 4 + static_cast<int>(seed % 6);
    int k = 1 + static_cast<int>(seed % 3);
    GradFixture f;
    f.context = steinrl::InstanceContext::make(random_instance(n, 2 + static_cast<int>(seed % 2), 0.3, 5, rng));
    auto state = steinrl::reset(f.context, k, rng);
    std::uniform_int_distribution<int> steps(0, n);
    for (int s = steps(rng); s > 0 && !state.done(); --s) {
        std::uniform_int_distribution<std::size_t> pick(0, state.frontier().size() - 1);
        auto front = state.frontier();
        steinrl::step(state, front[pick(rng)]);
    }
    if (state.done()) state = steinrl::reset(f.context, k, rng);
    f.snapshot = state.snapshot();
    f.params = steinrl::QNetParams::initialize(p, k, seed * 7 + 1,
                                               seed % 5 == 4 ? steinrl::Processor::Mlp
                                                             : steinrl::Processor::MessagePassing);
    // Widen the weights so that more units are active.
    f.params.add_scaled(f.params, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, f.snapshot.frontier.size() - 1);
    f.action = f.snapshot.frontier[pick(rng)];
    std::normal_distribution<double> t(0.0, 2.0);
    f.target = t(rng);
    return f;
}

// Signs of every pre-activation, so finite-difference probes that straddle
// a rectifier kink can be told apart from genuine mismatches.
inline std::vector<bool> activation_pattern(const steinrl::NetInput& in, const steinrl::QNetParams& p,
                                            steinrl::Vertex v) {
    auto pass = steinrl::forward(in, p);
    std::vector<bool> out;
    auto push = [&](const auto& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data()[i] > 0);
    };
    push(pass.encoded_pre);
    push(pass.combined_pre);
    push(pass.hidden_pre);
    push(pass.processed_pre);
    push(pass.graph_pre);
    steinrl::Vector vertex_pre = p.vertex_weights * pass.processed.row(v).transpose();
    push(vertex_pre);
    return out;
}

struct GradReport {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t skipped_kinks = 0;
};

inline double rel_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

inline GradReport check_gradient(const GradFixture& f, double h = 1e-5) {
    auto in = f.snapshot.input();
    auto analytic = steinrl::grad(in, f.action, f.target, f.params).flatten();
    auto theta = f.params.flatten();
    auto loss = [&](const steinrl::QNetParams& p) {
        double q = steinrl::forward(in, p).q(p, f.action);
        return (f.target - q) * (f.target - q);
    };
    GradReport r;
    auto probe = f.params;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        auto plus = theta, minus = theta;
        plus[i] += h;
        minus[i] -= h;
        probe.assign(plus);
        double lp = loss(probe);
        auto pattern_plus = activation_pattern(in, probe, f.action);
        probe.assign(minus);
        double lm = loss(probe);
        auto pattern_minus = activation_pattern(in, probe, f.action);
        if (pattern_plus != pattern_minus) {
            ++r.skipped_kinks;
            continue;
        }
        double numeric = (lp - lm) / (2 * h);
        r.max_rel_error = std::max(r.max_rel_error, rel_error(analytic[i], numeric));
        ++r.checked;
    }
    return r;
}

}  // namespace oracle
