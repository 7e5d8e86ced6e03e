#include "steinrl/reductions.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

namespace steinrl {
namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> out;
    for (std::size_t pos = 0; pos < text.size();) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        out.push_back(text.substr(pos, end - pos));
        pos = end + 1;
    }
    return out;
}

std::vector<std::string> words(std::string_view line) {
    std::istringstream in{std::string(line)};
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

long integer(const std::string& token, int line) {
    long value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw ReductionError("line " + std::to_string(line) + ": expected an integer, got '" +
                             token + "'");
    }
    return value;
}

bool covers(const SteinerTree& tree, Vertex v) {
    return std::binary_search(tree.covered.begin(), tree.covered.end(), v);
}

}  // namespace

Cnf parse_dimacs_cnf(std::string_view text) {
    Cnf cnf;
    bool header = false;
    long declared_clauses = 0;
    std::vector<int> current;
    int lineno = 0;
    for (auto line : split_lines(text)) {
        ++lineno;
        auto tokens = words(line);
        if (tokens.empty() || tokens[0] == "c") continue;
        if (tokens[0] == "%") break;  // SATLIB trailer
        if (tokens[0] == "p") {
            if (header || tokens.size() != 4 || tokens[1] != "cnf") {
                throw ReductionError("line " + std::to_string(lineno) + ": bad 'p cnf' header");
            }
            cnf.variables = static_cast<int>(integer(tokens[2], lineno));
            declared_clauses = integer(tokens[3], lineno);
            header = true;
            continue;
        }
        if (!header) {
            throw ReductionError("line " + std::to_string(lineno) + ": clause before 'p cnf' header");
        }
        for (const auto& tok : tokens) {
            long lit = integer(tok, lineno);
            if (lit == 0) {
                if (current.empty()) {
                    throw ReductionError("line " + std::to_string(lineno) + ": empty clause");
                }
                cnf.clauses.push_back(std::move(current));
                current.clear();
                continue;
            }
            if (std::abs(lit) > cnf.variables) {
                throw ReductionError("line " + std::to_string(lineno) + ": literal " +
                                     std::to_string(lit) + " exceeds variable count");
            }
            current.push_back(static_cast<int>(lit));
        }
    }
    if (!header) throw ReductionError("missing 'p cnf' header");
    if (!current.empty()) cnf.clauses.push_back(std::move(current));
    if (static_cast<long>(cnf.clauses.size()) != declared_clauses) {
        throw ReductionError("header declares " + std::to_string(declared_clauses) +
                             " clauses, found " + std::to_string(cnf.clauses.size()));
    }
    return cnf;
}

std::string write_dimacs_cnf(const Cnf& cnf) {
    std::ostringstream out;
    out << "p cnf " << cnf.variables << " " << cnf.clauses.size() << "\n";
    for (const auto& clause : cnf.clauses) {
        for (int lit : clause) out << lit << " ";
        out << "0\n";
    }
    return out.str();
}

bool satisfies(const Cnf& cnf, const std::vector<bool>& assignment) {
    if (assignment.size() != static_cast<std::size_t>(cnf.variables)) return false;
    return std::all_of(cnf.clauses.begin(), cnf.clauses.end(), [&](const auto& clause) {
        return std::any_of(clause.begin(), clause.end(), [&](int lit) {
            bool value = assignment[static_cast<std::size_t>(std::abs(lit) - 1)];
            return lit > 0 ? value : !value;
        });
    });
}

WeightedGraph parse_dimacs_graph(std::string_view text) {
    std::optional<WeightedGraph> graph;
    long declared = 0;
    int lineno = 0;
    for (auto line : split_lines(text)) {
        ++lineno;
        auto tokens = words(line);
        if (tokens.empty() || tokens[0] == "c") continue;
        if (tokens[0] == "p") {
            if (graph || tokens.size() != 4 || (tokens[1] != "edge" && tokens[1] != "col")) {
                throw ReductionError("line " + std::to_string(lineno) + ": bad 'p edge' header");
            }
            graph.emplace(static_cast<int>(integer(tokens[2], lineno)));
            declared = integer(tokens[3], lineno);
            continue;
        }
        if (tokens[0] != "e" || tokens.size() != 3 || !graph) {
            throw ReductionError("line " + std::to_string(lineno) + ": expected 'e u v'");
        }
        long u = integer(tokens[1], lineno) - 1;
        long v = integer(tokens[2], lineno) - 1;
        try {
            graph->add_edge(static_cast<Vertex>(u), static_cast<Vertex>(v), 1.0);
        } catch (const GraphError& err) {
            throw ReductionError("line " + std::to_string(lineno) + ": " + err.what());
        }
    }
    if (!graph) throw ReductionError("missing 'p edge' header");
    if (static_cast<long>(graph->edge_count()) != declared) {
        throw ReductionError("header declares " + std::to_string(declared) + " edges, found " +
                             std::to_string(graph->edge_count()));
    }
    return std::move(*graph);
}

std::string write_dimacs_graph(const WeightedGraph& graph) {
    std::ostringstream out;
    out << "p edge " << graph.vertex_count() << " " << graph.edge_count() << "\n";
    for (const auto& e : graph.edges()) out << "e " << e.u + 1 << " " << e.v + 1 << "\n";
    return out.str();
}

bool is_vertex_cover(const WeightedGraph& graph, const std::vector<Vertex>& cover) {
    std::vector<bool> in(static_cast<std::size_t>(graph.vertex_count()), false);
    for (Vertex v : cover) {
        if (!graph.has_vertex(v)) return false;
        in[v] = true;
    }
    return std::all_of(graph.edges().begin(), graph.edges().end(),
                       [&](const Edge& e) { return in[e.u] || in[e.v]; });
}

X3cInstance parse_x3c(std::string_view text) {
    X3cInstance x3c;
    bool header = false;
    long declared = 0;
    int lineno = 0;
    for (auto line : split_lines(text)) {
        ++lineno;
        auto tokens = words(line);
        if (tokens.empty() || tokens[0] == "c") continue;
        if (tokens[0] == "p") {
            if (header || tokens.size() != 4 || tokens[1] != "x3c") {
                throw ReductionError("line " + std::to_string(lineno) + ": bad 'p x3c' header");
            }
            x3c.universe = static_cast<int>(integer(tokens[2], lineno));
            declared = integer(tokens[3], lineno);
            header = true;
            continue;
        }
        if (!header || tokens.size() != 3) {
            throw ReductionError("line " + std::to_string(lineno) + ": expected a triple");
        }
        std::array<int, 3> triple{};
        for (int i = 0; i < 3; ++i) triple[i] = static_cast<int>(integer(tokens[i], lineno)) - 1;
        x3c.triples.push_back(triple);
    }
    if (!header) throw ReductionError("missing 'p x3c' header");
    if (static_cast<long>(x3c.triples.size()) != declared) {
        throw ReductionError("header declares " + std::to_string(declared) + " triples, found " +
                             std::to_string(x3c.triples.size()));
    }
    return x3c;
}

std::string write_x3c(const X3cInstance& x3c) {
    std::ostringstream out;
    out << "p x3c " << x3c.universe << " " << x3c.triples.size() << "\n";
    for (const auto& t : x3c.triples) out << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
    return out.str();
}

bool is_exact_cover(const X3cInstance& x3c, const std::vector<int>& chosen) {
    std::vector<int> hits(static_cast<std::size_t>(x3c.universe), 0);
    for (int j : chosen) {
        if (j < 0 || j >= static_cast<int>(x3c.triples.size())) return false;
        for (int e : x3c.triples[j]) ++hits[e];
    }
    return std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
}

std::string_view source_kind_name(SourceKind kind) {
    switch (kind) {
        case SourceKind::Sat: return "sat";
        case SourceKind::VertexCover: return "mvc";
        case SourceKind::ExactCover3: return "x3c";
    }
    return "?";
}

std::vector<int> WitnessMap::recover(const SteinerTree& tree) const {
    std::vector<int> out;
    switch (kind) {
        case SourceKind::Sat:
            for (Vertex p : primary) out.push_back(covers(tree, p) ? 1 : 0);
            break;
        case SourceKind::VertexCover: {
            std::vector<bool> chosen(primary.size(), false);
            for (std::size_t i = 0; i < primary.size(); ++i) chosen[i] = covers(tree, primary[i]);
            // A one-edge source graph reduces to a single terminal, whose
            // empty tree names no vertex; patch any edge left uncovered.
            for (std::size_t e = 0; e + 1 < secondary.size(); e += 2) {
                if (!chosen[secondary[e]] && !chosen[secondary[e + 1]]) {
                    chosen[std::min(secondary[e], secondary[e + 1])] = true;
                }
            }
            for (std::size_t i = 0; i < chosen.size(); ++i) {
                if (chosen[i]) out.push_back(static_cast<int>(i));
            }
            break;
        }
        case SourceKind::ExactCover3:
            for (std::size_t i = 0; i < primary.size(); ++i) {
                if (covers(tree, primary[i])) out.push_back(static_cast<int>(i));
            }
            break;
    }
    return out;
}

nlohmann::json WitnessMap::to_json() const {
    nlohmann::json j;
    j["kind"] = std::string(source_kind_name(kind));
    switch (kind) {
        case SourceKind::Sat:
            j["positive_literal_vertex"] = primary;
            j["negative_literal_vertex"] = secondary;
            break;
        case SourceKind::VertexCover:
            j["vertex_node"] = primary;
            j["edge_endpoints"] = secondary;
            break;
        case SourceKind::ExactCover3: j["triple_node"] = primary; break;
    }
    return j;
}

WitnessMap WitnessMap::from_json(const nlohmann::json& j) {
    WitnessMap w;
    auto kind = j.at("kind").get<std::string>();
    if (kind == "sat") {
        w.kind = SourceKind::Sat;
        w.primary = j.at("positive_literal_vertex").get<std::vector<Vertex>>();
        w.secondary = j.at("negative_literal_vertex").get<std::vector<Vertex>>();
    } else if (kind == "mvc") {
        w.kind = SourceKind::VertexCover;
        w.primary = j.at("vertex_node").get<std::vector<Vertex>>();
        w.secondary = j.value("edge_endpoints", std::vector<Vertex>{});
    } else if (kind == "x3c") {
        w.kind = SourceKind::ExactCover3;
        w.primary = j.at("triple_node").get<std::vector<Vertex>>();
    } else {
        throw ReductionError("unknown witness kind '" + kind + "'");
    }
    return w;
}

nlohmann::json ReductionOutput::metadata(std::uint64_t seed) const {
    return {{"source_kind", std::string(source_kind_name(witness.kind))},
            {"bound", *instance.bound},
            {"size_stats", size_stats},
            {"seed", seed}};
}

ReductionOutput reduce_sat(const Cnf& cnf) {
    const int n = cnf.variables;
    const int m = static_cast<int>(cnf.clauses.size());
    if (n < 1) throw ReductionError("formula has no variables");
    if (m < 1) throw ReductionError("formula has no clauses");
    const double clause_weight = n + 1;

    // Chain terminals 0..n, literal vertices n+1.., clause terminals 3n+1..
    auto positive = [n](int i) { return n + 1 + 2 * i; };
    auto negative = [n](int i) { return n + 2 + 2 * i; };
    auto clause_node = [n](int j) { return 3 * n + 1 + j; };

    ReductionOutput out;
    auto& inst = out.instance;
    inst.name = "sat-reduced";
    inst.graph = WeightedGraph(3 * n + 1 + m);
    for (int i = 0; i < n; ++i) {
        inst.graph.add_edge(i, positive(i), 1.0);
        inst.graph.add_edge(positive(i), i + 1, 1.0);
        inst.graph.add_edge(i, negative(i), 1.0);
        inst.graph.add_edge(negative(i), i + 1, 1.0);
    }
    for (int j = 0; j < m; ++j) {
        const auto& clause = cnf.clauses[j];
        if (clause.empty()) throw ReductionError("clause " + std::to_string(j + 1) + " is empty");
        std::set<int> seen;
        for (int lit : clause) {
            if (lit == 0 || std::abs(lit) > n) {
                throw ReductionError("clause " + std::to_string(j + 1) + " has invalid literal " +
                                     std::to_string(lit));
            }
            if (!seen.insert(lit).second) continue;
            int var = std::abs(lit) - 1;
            inst.graph.add_edge(clause_node(j), lit > 0 ? positive(var) : negative(var),
                                clause_weight);
        }
    }
    for (int i = 0; i <= n; ++i) inst.terminals.push_back(i);
    for (int j = 0; j < m; ++j) inst.terminals.push_back(clause_node(j));
    inst.bound = 2.0 * n + m * clause_weight;
    inst.validate();

    out.witness.kind = SourceKind::Sat;
    for (int i = 0; i < n; ++i) {
        out.witness.primary.push_back(positive(i));
        out.witness.secondary.push_back(negative(i));
    }
    out.size_stats = {{"vertices", inst.graph.vertex_count()},
                      {"edges", inst.graph.edge_count()},
                      {"terminals", inst.terminals.size()},
                      {"source_variables", n},
                      {"source_clauses", m}};
    return out;
}

ReductionOutput reduce_mvc(const VertexCoverInstance& mvc) {
    const auto& g = mvc.graph;
    const int nv = g.vertex_count();
    const int ne = static_cast<int>(g.edge_count());
    if (ne < 1) throw ReductionError("graph has no edges");
    if (mvc.cover_size < 1) throw ReductionError("cover size must be at least 1");
    const int k = std::min(mvc.cover_size, nv);
    const double heavy = nv + ne;

    ReductionOutput out;
    auto& inst = out.instance;
    inst.name = "mvc-reduced";
    inst.graph = WeightedGraph(nv + ne);
    for (Vertex a = 0; a < nv; ++a) {
        for (Vertex b = a + 1; b < nv; ++b) inst.graph.add_edge(a, b, 1.0);
    }
    for (int e = 0; e < ne; ++e) {
        const auto& edge = g.edge(e);
        for (Vertex v = 0; v < nv; ++v) {
            inst.graph.add_edge(v, nv + e, (v == edge.u || v == edge.v) ? 1.0 : heavy);
        }
    }
    for (int e = 0; e < ne; ++e) {
        for (int f = e + 1; f < ne; ++f) inst.graph.add_edge(nv + e, nv + f, heavy);
    }
    for (int e = 0; e < ne; ++e) inst.terminals.push_back(nv + e);
    inst.bound = static_cast<double>(ne + k - 1);
    inst.validate();

    out.witness.kind = SourceKind::VertexCover;
    for (Vertex v = 0; v < nv; ++v) out.witness.primary.push_back(v);
    for (const auto& edge : g.edges()) {
        out.witness.secondary.push_back(edge.u);
        out.witness.secondary.push_back(edge.v);
    }
    out.size_stats = {{"vertices", inst.graph.vertex_count()},
                      {"edges", inst.graph.edge_count()},
                      {"terminals", inst.terminals.size()},
                      {"source_vertices", nv},
                      {"source_edges", ne},
                      {"cover_size", mvc.cover_size}};
    return out;
}

ReductionOutput reduce_x3c(const X3cInstance& x3c) {
    const int universe = x3c.universe;
    if (universe < 3 || universe % 3 != 0) {
        throw ReductionError("universe size must be a positive multiple of 3");
    }
    const int t = static_cast<int>(x3c.triples.size());
    std::vector<bool> hit(static_cast<std::size_t>(universe), false);
    for (int j = 0; j < t; ++j) {
        const auto& tr = x3c.triples[j];
        for (int e : tr) {
            if (e < 0 || e >= universe) {
                throw ReductionError("triple " + std::to_string(j + 1) + " has element out of range");
            }
            hit[e] = true;
        }
        if (tr[0] == tr[1] || tr[0] == tr[2] || tr[1] == tr[2]) {
            throw ReductionError("triple " + std::to_string(j + 1) + " repeats an element");
        }
    }
    for (int e = 0; e < universe; ++e) {
        if (!hit[e]) {
            throw ReductionError("element " + std::to_string(e + 1) + " appears in no triple");
        }
    }
    const int q = universe / 3;
    const double element_weight = q + 1;

    // Root 0, triple nodes 1..t, element terminals t+1..t+universe.
    ReductionOutput out;
    auto& inst = out.instance;
    inst.name = "x3c-reduced";
    inst.graph = WeightedGraph(1 + t + universe);
    for (int j = 0; j < t; ++j) {
        inst.graph.add_edge(0, 1 + j, 1.0);
        for (int e : x3c.triples[j]) inst.graph.add_edge(1 + j, 1 + t + e, element_weight);
    }
    inst.terminals.push_back(0);
    for (int e = 0; e < universe; ++e) inst.terminals.push_back(1 + t + e);
    inst.bound = q + 3.0 * q * element_weight;
    inst.validate();

    out.witness.kind = SourceKind::ExactCover3;
    for (int j = 0; j < t; ++j) out.witness.primary.push_back(1 + j);
    out.size_stats = {{"vertices", inst.graph.vertex_count()},
                      {"edges", inst.graph.edge_count()},
                      {"terminals", inst.terminals.size()},
                      {"source_universe", universe},
                      {"source_triples", t}};
    return out;
}

}  // namespace steinrl
