#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "steinrl/graph.hpp"

namespace steinrl {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

class QNetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Processor stage variant. `Mlp` drops the neighbour-difference term and is
/// kept as an ablation of the message-passing processor.
enum class Processor { MessagePassing, Mlp };

/// Learnable parameters of the encode-process-decode Q network.
///
///   encode:  mu_v  = relu(state_weights [s_v, t_v] + feature_weights x_v)
///   process: mu'_v = relu(L2 relu(L1 relu[mu_v, sum_{u~v}(mu_v - mu_u)] + b1) + b2)
///   decode:  Q(v)  = readout . relu([graph_weights sum_u mu'_u, vertex_weights mu'_v])
///
/// The same struct doubles as the gradient container.
struct QNetParams {
    int p = 0;
    int k = 0;
    Processor processor = Processor::MessagePassing;

    Matrix state_weights;    // p x 2
    Matrix feature_weights;  // p x k
    Matrix hidden1;          // p x 2p
    Vector hidden1_bias;     // p
    Matrix hidden2;          // p x p
    Vector hidden2_bias;     // p
    Vector readout;          // 2p
    Matrix graph_weights;    // p x p
    Matrix vertex_weights;   // p x p

    static QNetParams zeros(int p, int k, Processor processor = Processor::MessagePassing);
    /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
    static QNetParams initialize(int p, int k, std::uint64_t seed,
                                 Processor processor = Processor::MessagePassing);

    std::size_t size() const;
    std::vector<double> flatten() const;
    void assign(const std::vector<double>& flat);
    bool all_finite() const;
    /// this += scale * other
    void add_scaled(const QNetParams& other, double scale);
    void check_shapes() const;

    bool operator==(const QNetParams& other) const;
};

/// Network input for one graph: per-vertex [s_v, t_v] bits and normalized
/// K-nearest terminal features.
struct NetInput {
    const WeightedGraph* graph = nullptr;
    Matrix state;     // n x 2
    Matrix features;  // n x k
};

/// Cached activations of one forward pass. Q for any vertex is read off
/// without recomputing the graph-level stages.
struct ForwardPass {
    Matrix encoded_pre;   // n x p
    Matrix encoded;       // n x p, mu
    Matrix combined_pre;  // n x 2p, [mu, neighbour differences]
    Matrix combined;      // relu of the above
    Matrix hidden_pre;    // n x p
    Matrix hidden;        // n x p
    Matrix processed_pre; // n x p
    Matrix processed;     // n x p, mu'
    Vector pooled;        // p, sum of mu'
    Vector graph_pre;     // p, graph_weights * pooled

    double q(const QNetParams& params, Vertex v) const;
};

Matrix encode(const NetInput& input, const QNetParams& params);
Matrix process(const Matrix& encoded, const WeightedGraph& graph, const QNetParams& params);
double decode_q(const Matrix& processed, Vertex v, const QNetParams& params);

ForwardPass forward(const NetInput& input, const QNetParams& params);

/// Adds d(coefficient * Q(v)) / d(params) into `grad`, reusing `pass`.
void accumulate_q_gradient(const QNetParams& params, const NetInput& input, const ForwardPass& pass,
                           Vertex v, double coefficient, QNetParams& grad);

/// Gradient of (target - Q(v))^2. Throws QNetError naming the stage that
/// produced a non-finite value.
QNetParams grad(const NetInput& input, Vertex v, double target, const QNetParams& params);

/// params -= learning_rate * gradient
void sgd_step(QNetParams& params, const QNetParams& gradient, double learning_rate);

nlohmann::json params_to_json(const QNetParams& params);
QNetParams params_from_json(const nlohmann::json& j);

/// Versioned JSON checkpoint: {format, version, precision, p, k, processor,
/// seed, tensors, metadata}. Tensors are stored row-major with their shape.
void save_checkpoint(const std::filesystem::path& path, const QNetParams& params,
                     std::uint64_t seed, const nlohmann::json& metadata);
struct Checkpoint {
    QNetParams params;
    std::uint64_t seed = 0;
    nlohmann::json metadata;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace steinrl
