#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "steinrl/bench.hpp"
#include "steinrl/steinlib.hpp"

using namespace steinrl;

namespace {

struct ConfigFlags {
    DdqnConfig config;
    std::string processor = "mp";

    void attach(CLI::App* app) {
        app->add_option("--rounds", config.rounds, "Training episodes (or active-search rounds)");
        app->add_option("--batch", config.batch, "Replay batch size");
        app->add_option("--gamma", config.gamma, "Discount factor");
        app->add_option("--lr", config.learning_rate, "SGD learning rate");
        app->add_option("--k", config.k, "Nearest terminals per feature row");
        app->add_option("--p-dim", config.p, "Embedding width");
        app->add_option("--epsilon-start", config.epsilon_start);
        app->add_option("--epsilon-end", config.epsilon_end);
        app->add_option("--target-sync", config.target_sync, "Training steps between target syncs");
        app->add_option("--replay-cap", config.replay_capacity);
        app->add_option("--validate-every", config.validate_every);
        app->add_option("--processor", processor, "mp (message passing) or mlp")
            ->check(CLI::IsMember({"mp", "mlp"}));
    }

    DdqnConfig finish(std::uint64_t seed) const {
        auto c = config;
        c.seed = seed;
        c.processor = processor == "mlp" ? Processor::Mlp : Processor::MessagePassing;
        c.validate();
        return c;
    }
};

std::vector<Method> parse_methods(const std::string& list) {
    std::vector<Method> out;
    std::stringstream in(list);
    for (std::string item; std::getline(in, item, ',');) out.push_back(parse_method(item));
    return out;
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        write_text_file(path, text);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Steiner tree solvers: exact, classic, and a learned greedy policy"};
    app.require_subcommand(1);
    std::uint64_t seed = 1;
    app.add_option("--seed", seed, "Seed for generators, exploration and initialization")
        ->capture_default_str();

    // solve
    auto* solve_cmd = app.add_subcommand("solve", "Solve one instance");
    std::string solve_source;
    std::string solve_method = "classic";
    std::string solve_checkpoint;
    std::string solve_out;
    std::string solve_edges;
    int active_rounds = 2000;
    ConfigFlags solve_flags;
    solve_cmd->add_option("source", solve_source, ".stp file or generator spec like rr:n=30")
        ->required();
    solve_cmd->add_option("--method", solve_method)
        ->check(CLI::IsMember({"classic", "exact", "agent", "active"}));
    solve_cmd->add_option("--checkpoint", solve_checkpoint, "Q-network checkpoint (agent/active)");
    solve_cmd->add_option("--active-rounds", active_rounds);
    solve_cmd->add_option("--out", solve_out, "JSON report path (stdout by default)");
    solve_cmd->add_option("--edges", solve_edges, "Write the tree as 'u v w' lines, 1-based");
    solve_flags.attach(solve_cmd);
    solve_cmd->add_option("--seed", seed);

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a Q-network on generated instances");
    TrainOptions train_opts;
    std::string train_sweep;
    ConfigFlags train_flags;
    train_cmd->add_option("--generator", train_opts.generator)->capture_default_str();
    train_cmd->add_option("--validation", train_opts.validation_instances,
                          "Held-out instances for checkpoint selection");
    train_cmd->add_option("--out", train_opts.out_dir, "Output directory")->capture_default_str();
    train_cmd->add_option("--sweep", train_sweep, "One run per value, e.g. gamma=0.2,0.5,0.8");
    train_flags.attach(train_cmd);
    train_cmd->add_option("--seed", seed);

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Benchmark methods over an instance set");
    BenchOptions bench_opts;
    std::string bench_methods = "classic";
    std::string bench_reference = "auto";
    std::string bench_checkpoint;
    std::string bench_out;
    std::string bench_format = "csv";
    ConfigFlags bench_flags;
    bench_cmd->add_option("source", bench_opts.source, "Directory, .stp file or generator spec")
        ->required();
    bench_cmd->add_option("--method", bench_methods, "Comma-separated methods");
    bench_cmd->add_option("--count", bench_opts.count, "Generated instances")->capture_default_str();
    bench_cmd->add_option("--trials", bench_opts.trials);
    bench_cmd->add_option("--reference", bench_reference)
        ->check(CLI::IsMember({"auto", "classic", "opt", "bound"}));
    bench_cmd->add_option("--checkpoint", bench_checkpoint);
    bench_cmd->add_option("--active-rounds", bench_opts.solve.active_rounds);
    bench_cmd->add_option("--jobs", bench_opts.jobs, "Worker threads");
    bench_cmd->add_flag("--timing", bench_opts.timing, "Include wall_ms in the report");
    bench_cmd->add_option("--format", bench_format)->check(CLI::IsMember({"csv", "json"}));
    bench_cmd->add_option("--out", bench_out, "Report path (stdout by default)");
    bench_flags.attach(bench_cmd);
    bench_cmd->add_option("--seed", seed);

    // reduce
    auto* reduce_cmd = app.add_subcommand("reduce", "Reduce SAT, vertex cover or X3C to STP");
    std::string reduce_kind;
    std::string reduce_source;
    std::optional<int> cover_size;
    std::string reduce_out;
    reduce_cmd->add_option("kind", reduce_kind)->required()->check(CLI::IsMember({"sat", "mvc", "x3c"}));
    reduce_cmd->add_option("source", reduce_source, "DIMACS CNF, DIMACS graph or x3c file")
        ->required()
        ->check(CLI::ExistingFile);
    reduce_cmd->add_option("--cover-size", cover_size, "Cover size k (mvc only)");
    reduce_cmd->add_option("--out", reduce_out, "Output stem")->required();
    reduce_cmd->add_option("--seed", seed);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve_cmd) {
            SolveOptions opts;
            opts.method = parse_method(solve_method);
            opts.config = solve_flags.finish(seed);
            opts.active_rounds = active_rounds;
            if (!solve_checkpoint.empty()) opts.params = load_checkpoint(solve_checkpoint).params;
            auto instances = load_instances(solve_source, 1, seed);
            std::optional<std::filesystem::path> edges;
            if (!solve_edges.empty()) edges = solve_edges;
            auto report = cmd_solve(instances.front(), opts, edges);
            emit(report.json.dump(1) + "\n", solve_out);
        } else if (*train_cmd) {
            train_opts.config = train_flags.finish(seed);
            if (!train_sweep.empty()) train_opts.sweep = train_sweep;
            auto runs = cmd_train(train_opts, [](const std::string& line) { std::cerr << line << "\n"; });
            for (const auto& r : runs) {
                std::cout << r.checkpoint.string() << " " << r.curve.string();
                if (r.best_gain) std::cout << " best_gain=" << format_real(*r.best_gain);
                std::cout << "\n";
            }
        } else if (*bench_cmd) {
            bench_opts.methods = parse_methods(bench_methods);
            bench_opts.reference = parse_reference(bench_reference);
            bench_opts.seed = seed;
            bench_opts.solve.config = bench_flags.finish(seed);
            if (!bench_checkpoint.empty()) {
                bench_opts.solve.params = load_checkpoint(bench_checkpoint).params;
            }
            auto report = cmd_bench(bench_opts);
            emit(bench_format == "json" ? report.to_json().dump(1) + "\n" : report.to_csv(), bench_out);
            for (const auto& a : report.aggregates()) {
                std::cerr << a.method << ": mean ratio " << format_real(a.mean_ratio) << " over "
                          << a.instances << " instances\n";
            }
        } else if (*reduce_cmd) {
            SourceKind kind = reduce_kind == "sat"   ? SourceKind::Sat
                              : reduce_kind == "mvc" ? SourceKind::VertexCover
                                                     : SourceKind::ExactCover3;
            auto files = cmd_reduce(kind, reduce_source, cover_size, reduce_out, seed);
            std::cout << files.stp.string() << "\nbound " << format_real(files.bound) << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
