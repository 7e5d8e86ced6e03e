#include "steinrl/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "steinrl/steinlib.hpp"

namespace steinrl {
namespace {

double checked_ratio(double cost, double reference, const char* what) {
    if (!(reference > 0.0) || !std::isfinite(reference)) {
        throw std::invalid_argument(std::string(what) + " reference must be positive");
    }
    if (!(cost >= 0.0) || !std::isfinite(cost)) {
        throw std::invalid_argument("solver cost must be finite and non-negative");
    }
    return cost / reference;
}

constexpr std::uint64_t kValidationSeedOffset = 10'000'000;

}  // namespace

double metric_gain(double solver_cost, double classic_cost) {
    return checked_ratio(solver_cost, classic_cost, "classic");
}
double metric_r(double solver_cost, double opt) { return checked_ratio(solver_cost, opt, "optimum"); }
double metric_b(double solver_cost, double bound) { return checked_ratio(solver_cost, bound, "bound"); }

std::string_view method_name(Method m) {
    switch (m) {
        case Method::Classic: return "classic";
        case Method::Exact: return "exact";
        case Method::Agent: return "agent";
        case Method::Active: return "active";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    if (name == "classic") return Method::Classic;
    if (name == "exact") return Method::Exact;
    if (name == "agent") return Method::Agent;
    if (name == "active") return Method::Active;
    throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

std::string_view reference_name(Reference r) {
    switch (r) {
        case Reference::Auto: return "auto";
        case Reference::Classic: return "classic";
        case Reference::Optimum: return "opt";
        case Reference::Bound: return "bound";
    }
    return "?";
}

Reference parse_reference(std::string_view name) {
    if (name == "auto") return Reference::Auto;
    if (name == "classic") return Reference::Classic;
    if (name == "opt") return Reference::Optimum;
    if (name == "bound") return Reference::Bound;
    throw std::invalid_argument("unknown reference '" + std::string(name) + "'");
}

std::vector<BenchAggregate> BenchReport::aggregates() const {
    std::map<std::string, std::map<int, std::vector<double>>> by_method;
    std::vector<std::string> order;
    for (const auto& r : rows) {
        if (!by_method.contains(r.method)) order.push_back(r.method);
        by_method[r.method][r.trial].push_back(r.ratio);
    }
    std::vector<BenchAggregate> out;
    for (const auto& method : order) {
        BenchAggregate agg{method, 0, 0.0, std::numeric_limits<double>::infinity()};
        double total = 0.0;
        std::size_t count = 0;
        for (const auto& [trial, ratios] : by_method[method]) {
            double sum = 0.0;
            for (double r : ratios) sum += r;
            total += sum;
            count += ratios.size();
            agg.instances = std::max(agg.instances, ratios.size());
            agg.best_trial_mean_ratio =
                std::min(agg.best_trial_mean_ratio, sum / static_cast<double>(ratios.size()));
        }
        agg.mean_ratio = total / static_cast<double>(count);
        out.push_back(agg);
    }
    return out;
}

std::string BenchReport::to_csv() const {
    std::ostringstream out;
    out << "instance,method,trial,cost,reference_kind,reference,ratio";
    if (timing) out << ",wall_ms";
    out << "\n";
    for (const auto& r : rows) {
        out << r.instance << "," << r.method << "," << r.trial << "," << format_real(r.cost) << ","
            << r.reference_kind << "," << format_real(r.reference) << "," << format_real(r.ratio);
        if (timing) out << "," << format_real(r.wall_ms);
        out << "\n";
    }
    return out.str();
}

nlohmann::json BenchReport::to_json() const {
    nlohmann::json j;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json row = {{"instance", r.instance},   {"method", r.method},
                              {"trial", r.trial},         {"cost", r.cost},
                              {"reference_kind", r.reference_kind},
                              {"reference", r.reference}, {"ratio", r.ratio}};
        if (timing) row["wall_ms"] = r.wall_ms;
        j["rows"].push_back(row);
    }
    j["aggregates"] = nlohmann::json::array();
    for (const auto& a : aggregates()) {
        j["aggregates"].push_back({{"method", a.method},
                                   {"instances", a.instances},
                                   {"mean_ratio", a.mean_ratio},
                                   {"best_trial_mean_ratio", a.best_trial_mean_ratio}});
    }
    return j;
}

SteinerTree solve(const StpInstance& instance, const SolveOptions& options) {
    switch (options.method) {
        case Method::Classic: return kmb(instance);
        case Method::Exact: return dreyfus_wagner(instance, options.exact_cap);
        case Method::Agent:
        case Method::Active: {
            if (!options.params) {
                throw std::invalid_argument("method '" + std::string(method_name(options.method)) +
                                            "' needs a checkpoint");
            }
            auto ctx = InstanceContext::make(instance, options.config.reward_bonus);
            if (options.method == Method::Agent) return greedy_rollout(ctx, *options.params);
            return active_search(ctx, *options.params, options.active_rounds, options.config).best;
        }
    }
    throw std::logic_error("unreachable");
}

bool looks_like_generator_spec(const std::string& source) {
    auto head = source.substr(0, source.find(':'));
    return (head == "rr" || head == "er" || head == "ws" || head == "RR" || head == "ER" ||
            head == "WS") &&
           !std::filesystem::exists(source);
}

std::vector<StpInstance> load_instances(const std::string& source, std::size_t count,
                                        std::uint64_t seed) {
    std::vector<StpInstance> out;
    if (looks_like_generator_spec(source)) {
        for (std::size_t i = 0; i < count; ++i) {
            out.push_back(generate(parse_generator_spec(source, seed + i)));
        }
        return out;
    }
    std::filesystem::path path(source);
    if (std::filesystem::is_directory(path)) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(path)) {
            auto ext = entry.path().extension().string();
            if (entry.is_regular_file() && (ext == ".stp" || ext == ".STP")) {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) out.push_back(read_steinlib_file(f));
        return out;
    }
    out.push_back(read_steinlib_file(path));
    return out;
}

SolveReport cmd_solve(const StpInstance& instance, const SolveOptions& options,
                      const std::optional<std::filesystem::path>& edge_list_out) {
    auto tree = solve(instance, options);
    // Every reported tree passes through verification again.
    auto verified = verify_tree(instance, tree.edges);

    nlohmann::json j = {{"instance", instance.name},
                        {"method", std::string(method_name(options.method))},
                        {"vertices", instance.graph.vertex_count()},
                        {"edges_in_graph", instance.graph.edge_count()},
                        {"terminals", instance.terminals.size()},
                        {"cost", verified.cost},
                        {"verified", true}};
    nlohmann::json edges = nlohmann::json::array();
    for (auto [a, b] : verified.edges) edges.push_back({a + 1, b + 1});
    j["tree_edges"] = edges;
    if (instance.known_opt) j["r"] = metric_r(verified.cost, *instance.known_opt);
    if (instance.bound) j["b"] = metric_b(verified.cost, *instance.bound);
    if (options.method != Method::Classic) {
        j["gain"] = metric_gain(verified.cost, kmb(instance).cost);
    }
    if (edge_list_out) {
        std::ostringstream out;
        for (auto [a, b] : verified.edges) {
            out << a + 1 << " " << b + 1 << " "
                << format_real(instance.graph.edge(*instance.graph.find_edge(a, b)).w) << "\n";
        }
        write_text_file(*edge_list_out, out.str());
    }
    return {j, verified};
}

std::vector<TrainSummary> cmd_train(const TrainOptions& options,
                                    const std::function<void(const std::string&)>& log) {
    struct Setting {
        std::string suffix;
        DdqnConfig config;
    };
    std::vector<Setting> settings;
    if (!options.sweep) {
        settings.push_back({"", options.config});
    } else {
        auto eq = options.sweep->find('=');
        if (eq == std::string::npos) throw std::invalid_argument("sweep must be name=v1,v2,...");
        auto name = options.sweep->substr(0, eq);
        std::stringstream values(options.sweep->substr(eq + 1));
        for (std::string v; std::getline(values, v, ',');) {
            auto cfg = options.config;
            double x = std::stod(v);
            if (name == "gamma") {
                cfg.gamma = x;
            } else if (name == "lr") {
                cfg.learning_rate = x;
            } else if (name == "batch") {
                cfg.batch = static_cast<std::size_t>(x);
            } else if (name == "k") {
                cfg.k = static_cast<int>(x);
            } else {
                throw std::invalid_argument("sweep supports gamma, lr, batch or k");
            }
            settings.push_back({"_" + name + "_" + v, cfg});
        }
    }

    std::filesystem::create_directories(options.out_dir);
    std::vector<TrainSummary> out;
    for (const auto& s : settings) {
        const auto& cfg = s.config;
        cfg.validate();
        auto base = parse_generator_spec(options.generator, cfg.seed);
        std::vector<StpInstance> held_out;
        for (std::size_t i = 0; i < options.validation_instances; ++i) {
            auto g = base;
            g.seed = cfg.seed + kValidationSeedOffset + i;
            held_out.push_back(generate(g));
        }
        auto validation = ValidationSet::build(held_out, cfg);
        auto stream = [&](int round) {
            auto g = base;
            g.seed = cfg.seed + static_cast<std::uint64_t>(round);
            return generate(g);
        };
        auto result = train(stream, validation, cfg, [&](const CurvePoint& p) {
            if (log && p.validation_gain) {
                log("round " + std::to_string(p.round + 1) + " validation gain " +
                    format_real(*p.validation_gain));
            }
        });

        TrainSummary summary;
        summary.checkpoint = options.out_dir / ("checkpoint" + s.suffix + ".json");
        summary.curve = options.out_dir / ("curve" + s.suffix + ".csv");
        summary.best_gain = result.best_gain;
        nlohmann::json meta = {{"config", cfg.to_json()},
                               {"generator", options.generator},
                               {"validation_instances", options.validation_instances},
                               {"train_steps", result.train_steps},
                               {"target_syncs", result.syncs}};
        meta["best_validation_gain"] =
            result.best_gain ? nlohmann::json(*result.best_gain) : nlohmann::json(nullptr);
        save_checkpoint(summary.checkpoint, result.best_params, cfg.seed, meta);
        write_text_file(summary.curve, curve_csv(result.curve));
        out.push_back(summary);
    }
    return out;
}

BenchReport cmd_bench(const BenchOptions& options) {
    auto instances = load_instances(options.source, options.count, options.seed);
    if (instances.empty()) throw std::invalid_argument("no instances to benchmark");
    for (auto m : options.methods) {
        if ((m == Method::Agent || m == Method::Active) && !options.solve.params) {
            throw std::invalid_argument("method '" + std::string(method_name(m)) +
                                        "' needs a checkpoint");
        }
    }
    const int trials = std::max(1, options.trials);

    // One job per (instance, method, trial); results land in fixed slots.
    struct Job {
        std::size_t instance;
        Method method;
        int trial;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        for (auto m : options.methods) {
            for (int t = 0; t < trials; ++t) jobs.push_back({i, m, t});
        }
    }
    std::vector<BenchRow> rows(jobs.size());
    std::vector<std::optional<double>> classic(instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i) {
        auto ref = options.reference;
        if (ref == Reference::Classic ||
            (ref == Reference::Auto && !instances[i].bound && !instances[i].known_opt)) {
            classic[i] = kmb(instances[i]).cost;
        }
    }

    auto run = [&](std::size_t j) {
        const auto& job = jobs[j];
        const auto& inst = instances[job.instance];
        auto solve_opts = options.solve;
        solve_opts.method = job.method;
        solve_opts.config.seed = options.solve.config.seed + static_cast<std::uint64_t>(job.trial);
        auto start = std::chrono::steady_clock::now();
        auto tree = verify_tree(inst, solve(inst, solve_opts).edges);
        auto stop = std::chrono::steady_clock::now();

        BenchRow row;
        row.instance = inst.name.empty() ? "instance-" + std::to_string(job.instance) : inst.name;
        row.method = std::string(method_name(job.method));
        row.trial = job.trial;
        row.cost = tree.cost;
        row.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
        auto ref = options.reference;
        if (ref == Reference::Auto) {
            ref = inst.bound ? Reference::Bound
                             : (inst.known_opt ? Reference::Optimum : Reference::Classic);
        }
        row.reference_kind = std::string(reference_name(ref));
        switch (ref) {
            case Reference::Bound:
                if (!inst.bound) throw std::invalid_argument(row.instance + " has no bound");
                row.reference = *inst.bound;
                row.ratio = metric_b(tree.cost, row.reference);
                break;
            case Reference::Optimum:
                if (!inst.known_opt) throw std::invalid_argument(row.instance + " has no known optimum");
                row.reference = *inst.known_opt;
                row.ratio = metric_r(tree.cost, row.reference);
                break;
            default:
                row.reference = *classic[job.instance];
                row.ratio = metric_gain(tree.cost, row.reference);
                break;
        }
        rows[j] = std::move(row);
    };

    const int workers = std::max(1, std::min<int>(options.jobs, static_cast<int>(jobs.size())));
    if (workers == 1) {
        for (std::size_t j = 0; j < jobs.size(); ++j) run(j);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) run(j);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    BenchReport report;
    report.timing = options.timing;
    report.rows = std::move(rows);
    return report;
}

ReduceFiles cmd_reduce(SourceKind kind, const std::filesystem::path& source,
                       std::optional<int> cover_size, const std::filesystem::path& out_stem,
                       std::uint64_t seed) {
    auto text = read_text_file(source);
    ReductionOutput reduced;
    switch (kind) {
        case SourceKind::Sat: reduced = reduce_sat(parse_dimacs_cnf(text)); break;
        case SourceKind::VertexCover:
            if (!cover_size) throw std::invalid_argument("mvc reduction needs --cover-size");
            reduced = reduce_mvc({parse_dimacs_graph(text), *cover_size});
            break;
        case SourceKind::ExactCover3: reduced = reduce_x3c(parse_x3c(text)); break;
    }
    reduced.instance.name = source.stem().string() + "-" + std::string(source_kind_name(kind));

    ReduceFiles files;
    files.stp = out_stem;
    files.stp += ".stp";
    files.witness = out_stem;
    files.witness += ".witness.json";
    files.metadata = out_stem;
    files.metadata += ".meta.json";
    files.bound = *reduced.instance.bound;
    if (out_stem.has_parent_path()) std::filesystem::create_directories(out_stem.parent_path());
    write_steinlib_file(reduced.instance, files.stp);
    write_text_file(files.witness, reduced.witness.to_json().dump(1) + "\n");
    write_text_file(files.metadata, reduced.metadata(seed).dump(1) + "\n");
    return files;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

}  // namespace steinrl
