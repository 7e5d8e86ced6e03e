#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "steinrl/ddqn.hpp"
#include "steinrl/generators.hpp"
#include "steinrl/reductions.hpp"

namespace steinrl {

/// Solver cost relative to the KMB cost.
double metric_gain(double solver_cost, double classic_cost);
/// Solver cost relative to the published optimum.
double metric_r(double solver_cost, double opt);
/// Solver cost relative to a reduction bound.
double metric_b(double solver_cost, double bound);

enum class Method { Classic, Exact, Agent, Active };
std::string_view method_name(Method m);
Method parse_method(std::string_view name);

enum class Reference { Auto, Classic, Optimum, Bound };
std::string_view reference_name(Reference r);
Reference parse_reference(std::string_view name);

struct BenchRow {
    std::string instance;
    std::string method;
    int trial = 0;
    double cost = 0.0;
    std::string reference_kind;
    double reference = 0.0;
    double ratio = 0.0;
    double wall_ms = 0.0;
};

struct BenchAggregate {
    std::string method;
    std::size_t instances = 0;
    double mean_ratio = 0.0;
    double best_trial_mean_ratio = 0.0;
};

struct BenchReport {
    std::vector<BenchRow> rows;
    bool timing = false;

    /// Recomputed from rows on every call.
    std::vector<BenchAggregate> aggregates() const;
    std::string to_csv() const;
    nlohmann::json to_json() const;
};

/// Shared solver front end used by the commands and the benchmark.
struct SolveOptions {
    Method method = Method::Classic;
    std::optional<QNetParams> params;  // required for Agent / Active
    DdqnConfig config;                 // active-search hyperparameters
    int active_rounds = 2000;
    int exact_cap = kDefaultExactTerminalCap;
};
SteinerTree solve(const StpInstance& instance, const SolveOptions& options);

/// An instance source is either a path (a .stp file or a directory of them)
/// or a generator spec such as "rr:n=30,m=0.2,w=5".
bool looks_like_generator_spec(const std::string& source);
std::vector<StpInstance> load_instances(const std::string& source, std::size_t count,
                                        std::uint64_t seed);

struct SolveReport {
    nlohmann::json json;
    SteinerTree tree;
};
SolveReport cmd_solve(const StpInstance& instance, const SolveOptions& options,
                      const std::optional<std::filesystem::path>& edge_list_out);

struct TrainOptions {
    std::string generator = "rr:n=30,m=0.2,w=5";
    DdqnConfig config;
    std::size_t validation_instances = 50;
    std::filesystem::path out_dir = ".";
    /// "name=v1,v2,..." over gamma, lr, batch or k; one curve per value.
    std::optional<std::string> sweep;
};
struct TrainSummary {
    std::filesystem::path checkpoint;
    std::filesystem::path curve;
    std::optional<double> best_gain;
};
std::vector<TrainSummary> cmd_train(const TrainOptions& options,
                                    const std::function<void(const std::string&)>& log = {});

struct BenchOptions {
    std::string source = "rr:n=30,m=0.2,w=5";
    std::size_t count = 200;
    std::vector<Method> methods{Method::Classic};
    int trials = 1;
    Reference reference = Reference::Auto;
    SolveOptions solve;
    std::uint64_t seed = 1;
    bool timing = false;
    int jobs = 1;
};
BenchReport cmd_bench(const BenchOptions& options);

/// Writes <stem>.stp, <stem>.witness.json and <stem>.meta.json.
struct ReduceFiles {
    std::filesystem::path stp;
    std::filesystem::path witness;
    std::filesystem::path metadata;
    double bound = 0.0;
};
ReduceFiles cmd_reduce(SourceKind kind, const std::filesystem::path& source,
                       std::optional<int> cover_size, const std::filesystem::path& out_stem,
                       std::uint64_t seed);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace steinrl
