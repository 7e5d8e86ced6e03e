#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "steinrl/graph.hpp"

namespace steinrl {

enum class GraphModel { RandomRegular, ErdosRenyi, WattsStrogatz };

std::string_view model_name(GraphModel model);
GraphModel parse_model(std::string_view name);

class GeneratorError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct GeneratorConfig {
    GraphModel model = GraphModel::RandomRegular;
    int n = 30;
    int rr_degree = 4;
    std::optional<double> er_probability;  // defaults to 2 ln(n) / n
    int ws_degree = 4;
    double ws_rewire = 0.3;
    double terminal_ratio = 0.2;
    int max_weight = 5;  // weights are integers in [1, max_weight]
    std::uint64_t seed = 0;

    double effective_er_probability() const;
    /// Throws GeneratorError when the parameters cannot produce a graph.
    void validate() const;
};

inline constexpr int kGeneratorRetryCap = 1000;

/// Deterministic in `config`. The graph is redrawn until connected and the
/// terminal set until it holds at least two vertices, each up to
/// kGeneratorRetryCap times.
StpInstance generate(const GeneratorConfig& config);

/// Parses "rr:n=30,d=4,m=0.2,w=5" style specs; unknown keys are errors.
GeneratorConfig parse_generator_spec(std::string_view spec, std::uint64_t seed);

}  // namespace steinrl
