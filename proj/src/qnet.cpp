#include "steinrl/qnet.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace steinrl {
namespace {

template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& x) {
    return x.cwiseMax(0.0);
}

template <typename Derived>
auto active(const Eigen::MatrixBase<Derived>& x) {
    return (x.array() > 0.0).template cast<double>();
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& x, const char* stage) {
    if (!x.allFinite()) throw QNetError(std::string("non-finite value in ") + stage);
}

// Fixed traversal order shared by flatten/assign/add_scaled and the checkpoint.
template <typename Params, typename Fn>
void for_each_tensor(Params& params, Fn&& fn) {
    fn("state_weights", params.state_weights);
    fn("feature_weights", params.feature_weights);
    fn("hidden1", params.hidden1);
    fn("hidden1_bias", params.hidden1_bias);
    fn("hidden2", params.hidden2);
    fn("hidden2_bias", params.hidden2_bias);
    fn("readout", params.readout);
    fn("graph_weights", params.graph_weights);
    fn("vertex_weights", params.vertex_weights);
}

void fill_uniform(auto& tensor, double fan_in, std::mt19937_64& rng) {
    double bound = 1.0 / std::sqrt(fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index i = 0; i < tensor.size(); ++i) tensor.data()[i] = dist(rng);
}

std::string processor_name(Processor p) {
    return p == Processor::Mlp ? "mlp" : "message_passing";
}

Processor processor_from_name(const std::string& name) {
    if (name == "mlp") return Processor::Mlp;
    if (name == "message_passing") return Processor::MessagePassing;
    throw QNetError("unknown processor '" + name + "'");
}

}  // namespace

QNetParams QNetParams::zeros(int p, int k, Processor processor) {
    if (p < 1 || k < 1) throw QNetError("embedding width and K must be positive");
    QNetParams out;
    out.p = p;
    out.k = k;
    out.processor = processor;
    out.state_weights = Matrix::Zero(p, 2);
    out.feature_weights = Matrix::Zero(p, k);
    out.hidden1 = Matrix::Zero(p, 2 * p);
    out.hidden1_bias = Vector::Zero(p);
    out.hidden2 = Matrix::Zero(p, p);
    out.hidden2_bias = Vector::Zero(p);
    out.readout = Vector::Zero(2 * p);
    out.graph_weights = Matrix::Zero(p, p);
    out.vertex_weights = Matrix::Zero(p, p);
    return out;
}

QNetParams QNetParams::initialize(int p, int k, std::uint64_t seed, Processor processor) {
    auto out = zeros(p, k, processor);
    std::mt19937_64 rng(seed);
    fill_uniform(out.state_weights, 2, rng);
    fill_uniform(out.feature_weights, k, rng);
    fill_uniform(out.hidden1, 2 * p, rng);
    fill_uniform(out.hidden1_bias, 2 * p, rng);
    fill_uniform(out.hidden2, p, rng);
    fill_uniform(out.hidden2_bias, p, rng);
    fill_uniform(out.readout, 2 * p, rng);
    fill_uniform(out.graph_weights, p, rng);
    fill_uniform(out.vertex_weights, p, rng);
    return out;
}

std::size_t QNetParams::size() const {
    std::size_t n = 0;
    for_each_tensor(*this, [&](const char*, const auto& t) { n += static_cast<std::size_t>(t.size()); });
    return n;
}

std::vector<double> QNetParams::flatten() const {
    std::vector<double> out;
    out.reserve(size());
    for_each_tensor(*this, [&](const char*, const auto& t) {
        out.insert(out.end(), t.data(), t.data() + t.size());
    });
    return out;
}

void QNetParams::assign(const std::vector<double>& flat) {
    if (flat.size() != size()) throw QNetError("flat parameter vector has wrong length");
    std::size_t offset = 0;
    for_each_tensor(*this, [&](const char*, auto& t) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), t.size(), t.data());
        offset += static_cast<std::size_t>(t.size());
    });
}

bool QNetParams::all_finite() const {
    bool ok = true;
    for_each_tensor(*this, [&](const char*, const auto& t) { ok = ok && t.allFinite(); });
    return ok;
}

void QNetParams::add_scaled(const QNetParams& other, double scale) {
    if (other.p != p || other.k != k) throw QNetError("parameter shapes differ");
    state_weights += scale * other.state_weights;
    feature_weights += scale * other.feature_weights;
    hidden1 += scale * other.hidden1;
    hidden1_bias += scale * other.hidden1_bias;
    hidden2 += scale * other.hidden2;
    hidden2_bias += scale * other.hidden2_bias;
    readout += scale * other.readout;
    graph_weights += scale * other.graph_weights;
    vertex_weights += scale * other.vertex_weights;
}

void QNetParams::check_shapes() const {
    auto expect = [](bool ok, const char* name) {
        if (!ok) throw QNetError(std::string("shape mismatch in ") + name);
    };
    expect(state_weights.rows() == p && state_weights.cols() == 2, "state_weights");
    expect(feature_weights.rows() == p && feature_weights.cols() == k, "feature_weights");
    expect(hidden1.rows() == p && hidden1.cols() == 2 * p, "hidden1");
    expect(hidden1_bias.size() == p, "hidden1_bias");
    expect(hidden2.rows() == p && hidden2.cols() == p, "hidden2");
    expect(hidden2_bias.size() == p, "hidden2_bias");
    expect(readout.size() == 2 * p, "readout");
    expect(graph_weights.rows() == p && graph_weights.cols() == p, "graph_weights");
    expect(vertex_weights.rows() == p && vertex_weights.cols() == p, "vertex_weights");
}

bool QNetParams::operator==(const QNetParams& other) const {
    return p == other.p && k == other.k && processor == other.processor &&
           flatten() == other.flatten();
}

Matrix encode(const NetInput& input, const QNetParams& params) {
    if (input.state.cols() != 2 || input.features.cols() != params.k ||
        input.state.rows() != input.features.rows()) {
        throw QNetError("encode: input shape does not match parameters");
    }
    return relu(input.state * params.state_weights.transpose() +
                input.features * params.feature_weights.transpose());
}

namespace {

// Rows: [mu_v, deg(v) mu_v - sum_{u~v} mu_u], before the rectifier.
Matrix combine(const Matrix& encoded, const WeightedGraph& graph, Processor processor) {
    const auto n = encoded.rows();
    const auto p = encoded.cols();
    Matrix out = Matrix::Zero(n, 2 * p);
    out.leftCols(p) = encoded;
    if (processor == Processor::MessagePassing) {
        for (const auto& e : graph.edges()) {
            auto diff = (encoded.row(e.u) - encoded.row(e.v)).eval();
            out.row(e.u).tail(p) += diff;
            out.row(e.v).tail(p) -= diff;
        }
    }
    return out;
}

}  // namespace

Matrix process(const Matrix& encoded, const WeightedGraph& graph, const QNetParams& params) {
    if (encoded.cols() != params.p || encoded.rows() != graph.vertex_count()) {
        throw QNetError("process: embedding shape does not match graph and parameters");
    }
    Matrix combined = relu(combine(encoded, graph, params.processor));
    Matrix hidden = relu((combined * params.hidden1.transpose()).rowwise() +
                         params.hidden1_bias.transpose());
    return relu((hidden * params.hidden2.transpose()).rowwise() + params.hidden2_bias.transpose());
}

double decode_q(const Matrix& processed, Vertex v, const QNetParams& params) {
    if (v < 0 || v >= processed.rows()) throw QNetError("decode: vertex out of range");
    const int p = params.p;
    Vector pooled = processed.colwise().sum().transpose();
    Vector graph_part = relu(params.graph_weights * pooled);
    Vector vertex_part = relu(params.vertex_weights * processed.row(v).transpose());
    return params.readout.head(p).dot(graph_part) + params.readout.tail(p).dot(vertex_part);
}

ForwardPass forward(const NetInput& input, const QNetParams& params) {
    if (input.graph == nullptr) throw QNetError("forward: input has no graph");
    if (input.state.rows() != input.graph->vertex_count()) {
        throw QNetError("forward: input rows do not match vertex count");
    }
    if (input.state.cols() != 2 || input.features.cols() != params.k ||
        input.features.rows() != input.state.rows()) {
        throw QNetError("forward: input shape does not match parameters");
    }
    ForwardPass f;
    f.encoded_pre = input.state * params.state_weights.transpose() +
                    input.features * params.feature_weights.transpose();
    require_finite(f.encoded_pre, "encode");
    f.encoded = relu(f.encoded_pre);
    f.combined_pre = combine(f.encoded, *input.graph, params.processor);
    f.combined = relu(f.combined_pre);
    f.hidden_pre = (f.combined * params.hidden1.transpose()).rowwise() +
                   params.hidden1_bias.transpose();
    require_finite(f.hidden_pre, "process layer 1");
    f.hidden = relu(f.hidden_pre);
    f.processed_pre = (f.hidden * params.hidden2.transpose()).rowwise() +
                      params.hidden2_bias.transpose();
    require_finite(f.processed_pre, "process layer 2");
    f.processed = relu(f.processed_pre);
    f.pooled = f.processed.colwise().sum().transpose();
    f.graph_pre = params.graph_weights * f.pooled;
    require_finite(f.graph_pre, "decode");
    return f;
}

double ForwardPass::q(const QNetParams& params, Vertex v) const {
    if (v < 0 || v >= processed.rows()) throw QNetError("decode: vertex out of range");
    const int p = params.p;
    Vector vertex_pre = params.vertex_weights * processed.row(v).transpose();
    return params.readout.head(p).dot(relu(graph_pre)) +
           params.readout.tail(p).dot(relu(vertex_pre));
}

void accumulate_q_gradient(const QNetParams& params, const NetInput& input, const ForwardPass& pass,
                           Vertex v, double coefficient, QNetParams& grad) {
    const int p = params.p;
    const auto n = pass.processed.rows();
    Vector vertex_in = pass.processed.row(v).transpose();
    Vector vertex_pre = params.vertex_weights * vertex_in;

    grad.readout.head(p) += coefficient * relu(pass.graph_pre);
    grad.readout.tail(p) += coefficient * relu(vertex_pre);

    Vector d_graph = coefficient * params.readout.head(p).cwiseProduct(active(pass.graph_pre).matrix());
    Vector d_vertex = coefficient * params.readout.tail(p).cwiseProduct(active(vertex_pre).matrix());
    grad.graph_weights += d_graph * pass.pooled.transpose();
    grad.vertex_weights += d_vertex * vertex_in.transpose();

    // Every mu'_u feeds the pooled sum; mu'_v also feeds the vertex term.
    Vector d_pooled = params.graph_weights.transpose() * d_graph;
    Matrix d_processed = d_pooled.transpose().replicate(n, 1);
    d_processed.row(v) += (params.vertex_weights.transpose() * d_vertex).transpose();

    Matrix d_out2 = d_processed.cwiseProduct(active(pass.processed_pre).matrix());
    grad.hidden2 += d_out2.transpose() * pass.hidden;
    grad.hidden2_bias += d_out2.colwise().sum().transpose();
    Matrix d_hidden = d_out2 * params.hidden2;

    Matrix d_out1 = d_hidden.cwiseProduct(active(pass.hidden_pre).matrix());
    grad.hidden1 += d_out1.transpose() * pass.combined;
    grad.hidden1_bias += d_out1.colwise().sum().transpose();
    Matrix d_combined = (d_out1 * params.hidden1).cwiseProduct(active(pass.combined_pre).matrix());

    Matrix d_encoded = d_combined.leftCols(p);
    if (params.processor == Processor::MessagePassing) {
        // The difference aggregation is the graph Laplacian, which is symmetric.
        for (const auto& e : input.graph->edges()) {
            auto diff = (d_combined.row(e.u).tail(p) - d_combined.row(e.v).tail(p)).eval();
            d_encoded.row(e.u) += diff;
            d_encoded.row(e.v) -= diff;
        }
    }
    Matrix d_enc_pre = d_encoded.cwiseProduct(active(pass.encoded_pre).matrix());
    grad.state_weights += d_enc_pre.transpose() * input.state;
    grad.feature_weights += d_enc_pre.transpose() * input.features;
}

QNetParams grad(const NetInput& input, Vertex v, double target, const QNetParams& params) {
    auto pass = forward(input, params);
    double residual = target - pass.q(params, v);
    auto out = QNetParams::zeros(params.p, params.k, params.processor);
    accumulate_q_gradient(params, input, pass, v, -2.0 * residual, out);
    if (!out.all_finite()) throw QNetError("non-finite value in gradient");
    return out;
}

void sgd_step(QNetParams& params, const QNetParams& gradient, double learning_rate) {
    if (!(learning_rate > 0.0)) throw QNetError("learning rate must be positive");
    if (!gradient.all_finite()) throw QNetError("non-finite gradient");
    params.add_scaled(gradient, -learning_rate);
}

nlohmann::json params_to_json(const QNetParams& params) {
    nlohmann::json tensors = nlohmann::json::object();
    for_each_tensor(params, [&](const char* name, const auto& t) {
        std::vector<double> data(t.data(), t.data() + t.size());
        tensors[name] = {{"shape", {t.rows(), t.cols()}}, {"data", data}};
    });
    return {{"p", params.p},
            {"k", params.k},
            {"processor", processor_name(params.processor)},
            {"tensors", tensors}};
}

QNetParams params_from_json(const nlohmann::json& j) {
    auto params = QNetParams::zeros(j.at("p").get<int>(), j.at("k").get<int>(),
                                    processor_from_name(j.value("processor", "message_passing")));
    const auto& tensors = j.at("tensors");
    for_each_tensor(params, [&](const char* name, auto& t) {
        const auto& entry = tensors.at(name);
        auto shape = entry.at("shape").get<std::vector<long>>();
        auto data = entry.at("data").get<std::vector<double>>();
        if (shape.size() != 2 || shape[0] != t.rows() || shape[1] != t.cols() ||
            data.size() != static_cast<std::size_t>(t.size())) {
            throw QNetError(std::string("checkpoint tensor '") + name + "' has the wrong shape");
        }
        std::copy(data.begin(), data.end(), t.data());
    });
    if (!params.all_finite()) throw QNetError("checkpoint contains non-finite parameters");
    return params;
}

void save_checkpoint(const std::filesystem::path& path, const QNetParams& params,
                     std::uint64_t seed, const nlohmann::json& metadata) {
    nlohmann::json j = params_to_json(params);
    j["format"] = "steinrl-qnet";
    j["version"] = 1;
    j["precision"] = "float64";
    j["seed"] = seed;
    j["metadata"] = metadata;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw QNetError("cannot write checkpoint " + path.string());
    out << j.dump(1) << "\n";
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw QNetError("cannot open checkpoint " + path.string());
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.value("format", "") != "steinrl-qnet") throw QNetError("not a steinrl checkpoint");
    if (j.value("version", 0) != 1) throw QNetError("unsupported checkpoint version");
    if (j.value("precision", "") != "float64") throw QNetError("unsupported checkpoint precision");
    return {params_from_json(j), j.value("seed", std::uint64_t{0}),
            j.value("metadata", nlohmann::json::object())};
}

}  // namespace steinrl
