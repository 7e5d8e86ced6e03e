#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "steinrl/bench.hpp"
#include "steinrl/ddqn.hpp"
#include "steinrl/env.hpp"
#include "steinrl/generators.hpp"
#include "steinrl/reductions.hpp"
#include "steinrl/solvers.hpp"
#include "steinrl/steinlib.hpp"

namespace py = pybind11;
using namespace steinrl;

namespace {

// JSON crosses the boundary as text; the Python side decodes it.
std::string dump(const nlohmann::json& j) { return j.dump(); }

StpInstance make_instance(int n, const std::vector<std::tuple<Vertex, Vertex, double>>& edges,
                          const std::vector<Vertex>& terminals, const std::string& name) {
    StpInstance inst;
    inst.name = name;
    inst.graph = WeightedGraph(n);
    for (auto [u, v, w] : edges) inst.graph.add_edge(u, v, w);
    inst.terminals = terminals;
    inst.validate();
    return inst;
}

std::vector<std::tuple<Vertex, Vertex, double>> edge_list(const StpInstance& inst) {
    std::vector<std::tuple<Vertex, Vertex, double>> out;
    for (const auto& e : inst.graph.edges()) out.emplace_back(e.u, e.v, e.w);
    return out;
}

std::pair<StpInstance, std::string> reduced(const ReductionOutput& r) {
    return {r.instance, dump(r.witness.to_json())};
}

DdqnConfig search_config(const QNetParams& params, std::uint64_t seed) {
    DdqnConfig c;
    c.k = params.k;
    c.p = params.p;
    c.processor = params.processor;
    c.seed = seed;
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Steiner tree solvers and a learned greedy policy";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<TreeError>(m, "TreeError", PyExc_ValueError);
    py::register_exception<ReductionError>(m, "ReductionError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    py::class_<StpInstance>(m, "Instance")
        .def(py::init(&make_instance), py::arg("vertex_count"), py::arg("edges"),
             py::arg("terminals"), py::arg("name") = "")
        .def_readwrite("name", &StpInstance::name)
        .def_readonly("terminals", &StpInstance::terminals)
        .def_readwrite("known_opt", &StpInstance::known_opt)
        .def_readwrite("bound", &StpInstance::bound)
        .def_property_readonly("vertex_count",
                               [](const StpInstance& s) { return s.graph.vertex_count(); })
        .def_property_readonly("edges", &edge_list)
        .def("__eq__", [](const StpInstance& a, const StpInstance& b) { return a == b; })
        .def("__repr__", [](const StpInstance& s) {
            return "<Instance " + s.name + " |V|=" + std::to_string(s.graph.vertex_count()) +
                   " |E|=" + std::to_string(s.graph.edge_count()) +
                   " |T|=" + std::to_string(s.terminals.size()) + ">";
        });

    py::class_<SteinerTree>(m, "Tree")
        .def_readonly("edges", &SteinerTree::edges)
        .def_readonly("cost", &SteinerTree::cost)
        .def_readonly("covered", &SteinerTree::covered)
        .def("__repr__", [](const SteinerTree& t) {
            return "<Tree cost=" + format_real(t.cost) + " edges=" + std::to_string(t.edges.size()) +
                   ">";
        });

    py::class_<QNetParams>(m, "QNet")
        .def_readonly("p", &QNetParams::p)
        .def_readonly("k", &QNetParams::k);

    m.def("parse_steinlib", [](const std::string& text) { return parse_steinlib(text); });
    m.def("read_steinlib", [](const std::filesystem::path& p) { return read_steinlib_file(p); });
    m.def("write_steinlib", &write_steinlib);
    m.def(
        "generate",
        [](const std::string& spec, std::uint64_t seed) { return generate(parse_generator_spec(spec, seed)); },
        py::arg("spec"), py::arg("seed") = 1);

    m.def("verify_tree", &verify_tree, py::arg("instance"), py::arg("edges"));
    m.def("kmb", &kmb);
    m.def("exact", &dreyfus_wagner, py::arg("instance"), py::arg("terminal_cap") = kDefaultExactTerminalCap);

    m.def("initialize_qnet", [](int p, int k, std::uint64_t seed) { return QNetParams::initialize(p, k, seed); },
          py::arg("p") = 64, py::arg("k") = 2, py::arg("seed") = 1);
    m.def("load_checkpoint", [](const std::filesystem::path& p) { return load_checkpoint(p).params; });
    m.def(
        "agent",
        [](const StpInstance& inst, const QNetParams& params) {
            return greedy_rollout(InstanceContext::make(inst), params);
        },
        py::arg("instance"), py::arg("qnet"));
    m.def(
        "active_search",
        [](const StpInstance& inst, const QNetParams& params, int rounds, std::uint64_t seed) {
            py::gil_scoped_release release;
            return active_search(InstanceContext::make(inst), params, rounds,
                                 search_config(params, seed))
                .best;
        },
        py::arg("instance"), py::arg("qnet"), py::arg("rounds") = 2000, py::arg("seed") = 1);

    m.def("metric_gain", &metric_gain);
    m.def("metric_r", &metric_r);
    m.def("metric_b", &metric_b);

    m.def("reduce_sat", [](const std::string& text) { return reduced(reduce_sat(parse_dimacs_cnf(text))); });
    m.def("reduce_mvc", [](const std::string& text, int k) {
        return reduced(reduce_mvc({parse_dimacs_graph(text), k}));
    });
    m.def("reduce_x3c", [](const std::string& text) { return reduced(reduce_x3c(parse_x3c(text))); });
    m.def("recover", [](const std::string& witness_json, const SteinerTree& tree) {
        return WitnessMap::from_json(nlohmann::json::parse(witness_json)).recover(tree);
    });

    m.def(
        "bench_json",
        [](const std::string& source, const std::vector<std::string>& methods, std::size_t count,
           int trials, const std::string& reference, std::optional<std::filesystem::path> checkpoint,
           int active_rounds, std::uint64_t seed, int jobs) {
            BenchOptions o;
            o.source = source;
            o.methods.clear();
            for (const auto& name : methods) o.methods.push_back(parse_method(name));
            o.count = count;
            o.trials = trials;
            o.reference = parse_reference(reference);
            o.seed = seed;
            o.jobs = jobs;
            o.solve.active_rounds = active_rounds;
            if (checkpoint) {
                o.solve.params = load_checkpoint(*checkpoint).params;
                o.solve.config = search_config(*o.solve.params, seed);
            }
            py::gil_scoped_release release;
            return dump(cmd_bench(o).to_json());
        },
        py::arg("source"), py::arg("methods"), py::arg("count") = 200, py::arg("trials") = 1,
        py::arg("reference") = "auto", py::arg("checkpoint") = std::nullopt,
        py::arg("active_rounds") = 2000, py::arg("seed") = 1, py::arg("jobs") = 1);
}
