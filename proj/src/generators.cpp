#include "steinrl/generators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace steinrl {
namespace {

using EdgeList = std::vector<std::pair<Vertex, Vertex>>;
using Rng = std::mt19937_64;

std::pair<Vertex, Vertex> ordered(Vertex a, Vertex b) { return {std::min(a, b), std::max(a, b)}; }

std::optional<EdgeList> draw_random_regular(int n, int d, Rng& rng) {
    std::vector<Vertex> stubs;
    stubs.reserve(static_cast<std::size_t>(n) * d);
    for (Vertex v = 0; v < n; ++v) stubs.insert(stubs.end(), static_cast<std::size_t>(d), v);

    std::set<std::pair<Vertex, Vertex>> chosen;
    auto suitable = [&](Vertex a, Vertex b) { return a != b && !chosen.contains(ordered(a, b)); };
    while (!stubs.empty()) {
        bool paired = false;
        for (int attempt = 0; attempt < 64 && !paired; ++attempt) {
            std::uniform_int_distribution<std::size_t> pick(0, stubs.size() - 1);
            std::size_t i = pick(rng);
            std::size_t j = pick(rng);
            if (i == j || !suitable(stubs[i], stubs[j])) continue;
            chosen.insert(ordered(stubs[i], stubs[j]));
            if (i < j) std::swap(i, j);
            stubs.erase(stubs.begin() + static_cast<std::ptrdiff_t>(i));
            stubs.erase(stubs.begin() + static_cast<std::ptrdiff_t>(j));
            paired = true;
        }
        if (paired) continue;
        bool any = false;
        for (std::size_t i = 0; i < stubs.size() && !any; ++i) {
            for (std::size_t j = i + 1; j < stubs.size() && !any; ++j) {
                any = suitable(stubs[i], stubs[j]);
            }
        }
        if (!any) return std::nullopt;
    }
    return EdgeList(chosen.begin(), chosen.end());
}

EdgeList draw_erdos_renyi(int n, double p, Rng& rng) {
    EdgeList edges;
    std::bernoulli_distribution coin(p);
    for (Vertex u = 0; u < n; ++u) {
        for (Vertex v = u + 1; v < n; ++v) {
            if (coin(rng)) edges.emplace_back(u, v);
        }
    }
    return edges;
}

EdgeList draw_watts_strogatz(int n, int k, double beta, Rng& rng) {
    std::set<std::pair<Vertex, Vertex>> edges;
    for (Vertex u = 0; u < n; ++u) {
        for (int j = 1; j <= k / 2; ++j) edges.insert(ordered(u, (u + j) % n));
    }
    std::bernoulli_distribution rewire(beta);
    std::uniform_int_distribution<Vertex> any_vertex(0, n - 1);
    for (int j = 1; j <= k / 2; ++j) {
        for (Vertex u = 0; u < n; ++u) {
            Vertex v = (u + j) % n;
            if (!rewire(rng)) continue;
            int degree = 0;
            for (const auto& e : edges) degree += (e.first == u || e.second == u) ? 1 : 0;
            if (degree >= n - 1) continue;
            Vertex w = any_vertex(rng);
            while (w == u || edges.contains(ordered(u, w))) w = any_vertex(rng);
            edges.erase(ordered(u, v));
            edges.insert(ordered(u, w));
        }
    }
    return EdgeList(edges.begin(), edges.end());
}

bool connected(int n, const EdgeList& edges) {
    WeightedGraph g(n);
    for (auto [u, v] : edges) g.add_edge(u, v, 1.0);
    auto seen = reachable_from(g, 0);
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

}  // namespace

std::string_view model_name(GraphModel model) {
    switch (model) {
        case GraphModel::RandomRegular: return "rr";
        case GraphModel::ErdosRenyi: return "er";
        case GraphModel::WattsStrogatz: return "ws";
    }
    return "?";
}

GraphModel parse_model(std::string_view name) {
    if (name == "rr" || name == "RR") return GraphModel::RandomRegular;
    if (name == "er" || name == "ER") return GraphModel::ErdosRenyi;
    if (name == "ws" || name == "WS") return GraphModel::WattsStrogatz;
    throw GeneratorError("unknown graph model '" + std::string(name) + "'");
}

double GeneratorConfig::effective_er_probability() const {
    if (er_probability) return *er_probability;
    return std::min(1.0, 2.0 * std::log(static_cast<double>(n)) / n);
}

void GeneratorConfig::validate() const {
    if (n < 3) throw GeneratorError("n must be at least 3");
    if (!(terminal_ratio > 0.0 && terminal_ratio <= 1.0)) {
        throw GeneratorError("terminal ratio must lie in (0, 1]");
    }
    if (max_weight < 1) throw GeneratorError("weight range [1, n_w] is empty");
    switch (model) {
        case GraphModel::RandomRegular:
            if (rr_degree < 1 || rr_degree >= n) throw GeneratorError("RR degree must be in [1, n)");
            if ((static_cast<long>(n) * rr_degree) % 2 != 0) {
                throw GeneratorError("RR requires n*d even");
            }
            break;
        case GraphModel::ErdosRenyi: {
            double p = effective_er_probability();
            if (!(p > 0.0 && p <= 1.0)) throw GeneratorError("ER probability must lie in (0, 1]");
            break;
        }
        case GraphModel::WattsStrogatz:
            if (ws_degree < 2 || ws_degree % 2 != 0 || ws_degree >= n) {
                throw GeneratorError("WS ring degree must be even and in [2, n)");
            }
            if (!(ws_rewire >= 0.0 && ws_rewire <= 1.0)) {
                throw GeneratorError("WS rewiring probability must lie in [0, 1]");
            }
            break;
    }
}

StpInstance generate(const GeneratorConfig& config) {
    config.validate();
    Rng rng(config.seed);

    std::optional<EdgeList> edges;
    for (int attempt = 0; attempt < kGeneratorRetryCap && !edges; ++attempt) {
        std::optional<EdgeList> draw;
        switch (config.model) {
            case GraphModel::RandomRegular:
                draw = draw_random_regular(config.n, config.rr_degree, rng);
                break;
            case GraphModel::ErdosRenyi:
                draw = draw_erdos_renyi(config.n, config.effective_er_probability(), rng);
                break;
            case GraphModel::WattsStrogatz:
                draw = draw_watts_strogatz(config.n, config.ws_degree, config.ws_rewire, rng);
                break;
        }
        if (draw && connected(config.n, *draw)) edges = std::move(draw);
    }
    if (!edges) {
        throw GeneratorError("no connected graph after " + std::to_string(kGeneratorRetryCap) +
                             " draws");
    }

    StpInstance instance;
    instance.name = std::string(model_name(config.model)) + "-n" + std::to_string(config.n) +
                    "-s" + std::to_string(config.seed);
    instance.graph = WeightedGraph(config.n);
    std::uniform_int_distribution<int> weight(1, config.max_weight);
    for (auto [u, v] : *edges) instance.graph.add_edge(u, v, weight(rng));

    std::bernoulli_distribution is_terminal(config.terminal_ratio);
    for (int attempt = 0; attempt < kGeneratorRetryCap; ++attempt) {
        instance.terminals.clear();
        for (Vertex v = 0; v < config.n; ++v) {
            if (is_terminal(rng)) instance.terminals.push_back(v);
        }
        if (instance.terminals.size() >= 2) break;
    }
    if (instance.terminals.size() < 2) {
        throw GeneratorError("fewer than two terminals after " +
                             std::to_string(kGeneratorRetryCap) + " draws");
    }
    instance.validate();
    return instance;
}

GeneratorConfig parse_generator_spec(std::string_view spec, std::uint64_t seed) {
    GeneratorConfig config;
    config.seed = seed;
    auto colon = spec.find(':');
    config.model = parse_model(spec.substr(0, colon));
    if (colon == std::string_view::npos) return config;

    auto rest = spec.substr(colon + 1);
    while (!rest.empty()) {
        auto comma = rest.find(',');
        auto item = rest.substr(0, comma);
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        auto eq = item.find('=');
        if (eq == std::string_view::npos) {
            throw GeneratorError("expected key=value in generator spec, got '" + std::string(item) +
                                 "'");
        }
        auto key = item.substr(0, eq);
        std::string value(item.substr(eq + 1));
        double x = 0.0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
        if (ec != std::errc{} || ptr != value.data() + value.size()) {
            throw GeneratorError("bad number '" + value + "' in generator spec");
        }
        if (key == "n") {
            config.n = static_cast<int>(x);
        } else if (key == "d") {
            config.rr_degree = static_cast<int>(x);
        } else if (key == "p") {
            config.er_probability = x;
        } else if (key == "k") {
            config.ws_degree = static_cast<int>(x);
        } else if (key == "beta") {
            config.ws_rewire = x;
        } else if (key == "m") {
            config.terminal_ratio = x;
        } else if (key == "w") {
            config.max_weight = static_cast<int>(x);
        } else {
            throw GeneratorError("unknown generator key '" + std::string(key) + "'");
        }
    }
    config.validate();
    return config;
}

}  // namespace steinrl
