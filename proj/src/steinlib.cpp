#include "steinrl/steinlib.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

namespace steinrl {
namespace {

const char* kind_name(ParseError::Kind kind) {
    switch (kind) {
        case ParseError::Kind::BadHeader: return "bad header";
        case ParseError::Kind::MissingSection: return "missing section";
        case ParseError::Kind::UnterminatedSection: return "unterminated section";
        case ParseError::Kind::Syntax: return "syntax error";
        case ParseError::Kind::VertexOutOfRange: return "vertex out of range";
        case ParseError::Kind::DuplicateEdge: return "duplicate edge";
        case ParseError::Kind::SelfLoop: return "self-loop";
        case ParseError::Kind::NonPositiveWeight: return "non-positive weight";
        case ParseError::Kind::CountMismatch: return "count mismatch";
        case ParseError::Kind::TerminalOutOfRange: return "terminal out of range";
        case ParseError::Kind::NoTerminals: return "no terminals";
        case ParseError::Kind::Disconnected: return "terminals disconnected";
    }
    return "parse error";
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> tokenize(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i >= line.size()) break;
        if (line[i] == '"') {
            auto end = line.find('"', i + 1);
            if (end == std::string_view::npos) end = line.size();
            out.emplace_back(line.substr(i + 1, end - i - 1));
            i = end + 1;
            continue;
        }
        std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        out.emplace_back(line.substr(start, i - start));
    }
    return out;
}

template <typename T>
T number(const std::string& token, int line) {
    T value{};
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw ParseError(ParseError::Kind::Syntax, line, "expected a number, got '" + token + "'");
    }
    return value;
}

struct RawEdge {
    long u;
    long v;
    double w;
    int line;
};

}  // namespace

ParseError::ParseError(Kind kind, int line, const std::string& detail)
    : std::runtime_error(std::string(kind_name(kind)) +
                         (line > 0 ? " at line " + std::to_string(line) : std::string{}) + ": " +
                         detail),
      kind_(kind),
      line_(line) {}

StpInstance parse_steinlib(std::string_view text) {
    std::vector<std::string_view> lines;
    for (std::size_t pos = 0; pos <= text.size();) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        pos = end + 1;
    }

    StpInstance instance;
    std::optional<long> nodes;
    std::optional<long> declared_edges;
    std::optional<long> declared_terminals;
    std::vector<RawEdge> edges;
    std::vector<std::pair<long, int>> terminals;
    bool saw_graph = false;
    bool saw_terminals = false;
    bool saw_header = false;
    std::string section;
    int section_line = 0;

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const int lineno = static_cast<int>(i) + 1;
        auto tokens = tokenize(lines[i]);
        if (tokens.empty() || tokens.front().starts_with("#")) continue;
        auto key = lower(tokens.front());

        if (!saw_header) {
            saw_header = true;
            // The magic line is optional; hand-written fixtures often omit it.
            if (key != "section") {
                if (lower(lines[i]).find("stp file") == std::string::npos) {
                    throw ParseError(ParseError::Kind::BadHeader, lineno,
                                     "expected the 'STP File' magic line");
                }
                continue;
            }
        }
        if (section.empty()) {
            if (key == "eof") break;
            if (key != "section" || tokens.size() < 2) {
                throw ParseError(ParseError::Kind::Syntax, lineno,
                                 "expected SECTION or EOF, got '" + tokens.front() + "'");
            }
            section = lower(tokens[1]);
            section_line = lineno;
            if (section == "graph") saw_graph = true;
            if (section == "terminals") saw_terminals = true;
            continue;
        }
        if (key == "end") {
            section.clear();
            continue;
        }
        if (key == "eof" || key == "section") {
            throw ParseError(ParseError::Kind::UnterminatedSection, section_line,
                             "section '" + section + "' has no END");
        }

        if (section == "comment") {
            if (tokens.size() >= 2) {
                if (key == "name") instance.name = tokens[1];
                if (key == "optimum") instance.known_opt = number<double>(tokens[1], lineno);
                if (key == "bound") instance.bound = number<double>(tokens[1], lineno);
            }
        } else if (section == "graph") {
            if (key == "nodes" && tokens.size() == 2) {
                nodes = number<long>(tokens[1], lineno);
            } else if ((key == "edges" || key == "arcs") && tokens.size() == 2) {
                declared_edges = number<long>(tokens[1], lineno);
            } else if ((key == "e" || key == "a") && tokens.size() == 4) {
                edges.push_back({number<long>(tokens[1], lineno), number<long>(tokens[2], lineno),
                                 number<double>(tokens[3], lineno), lineno});
            } else {
                throw ParseError(ParseError::Kind::Syntax, lineno,
                                 "unrecognised Graph line '" + std::string(lines[i]) + "'");
            }
        } else if (section == "terminals") {
            if (key == "terminals" && tokens.size() == 2) {
                declared_terminals = number<long>(tokens[1], lineno);
            } else if (key == "t" && tokens.size() == 2) {
                terminals.emplace_back(number<long>(tokens[1], lineno), lineno);
            } else if (key == "root" && tokens.size() == 2) {
                // Rooted variants: the root is an ordinary terminal here.
                terminals.emplace_back(number<long>(tokens[1], lineno), lineno);
            } else {
                throw ParseError(ParseError::Kind::Syntax, lineno,
                                 "unrecognised Terminals line '" + std::string(lines[i]) + "'");
            }
        }
        // Other sections (Coordinates, MaximumDegrees, ...) are ignored.
    }

    if (!saw_header) throw ParseError(ParseError::Kind::BadHeader, 0, "empty input");
    if (!section.empty()) {
        throw ParseError(ParseError::Kind::UnterminatedSection, section_line,
                         "section '" + section + "' has no END");
    }
    if (!saw_graph) throw ParseError(ParseError::Kind::MissingSection, 0, "SECTION Graph");
    if (!saw_terminals) throw ParseError(ParseError::Kind::MissingSection, 0, "SECTION Terminals");
    if (!nodes || *nodes < 1) {
        throw ParseError(ParseError::Kind::Syntax, section_line, "Graph section lacks 'Nodes'");
    }
    if (declared_edges && *declared_edges != static_cast<long>(edges.size())) {
        throw ParseError(ParseError::Kind::CountMismatch, 0,
                         "declared " + std::to_string(*declared_edges) + " edges, found " +
                             std::to_string(edges.size()));
    }

    instance.graph = WeightedGraph(static_cast<int>(*nodes));
    for (const auto& e : edges) {
        if (e.u < 1 || e.u > *nodes || e.v < 1 || e.v > *nodes) {
            throw ParseError(ParseError::Kind::VertexOutOfRange, e.line, "edge endpoint");
        }
        if (e.u == e.v) throw ParseError(ParseError::Kind::SelfLoop, e.line, "edge endpoint");
        if (!(e.w > 0.0)) {
            throw ParseError(ParseError::Kind::NonPositiveWeight, e.line, "edge weight");
        }
        auto u = static_cast<Vertex>(e.u - 1);
        auto v = static_cast<Vertex>(e.v - 1);
        if (instance.graph.find_edge(u, v)) {
            throw ParseError(ParseError::Kind::DuplicateEdge, e.line,
                             "E " + std::to_string(e.u) + " " + std::to_string(e.v));
        }
        instance.graph.add_edge(u, v, e.w);
    }

    for (auto [t, lineno] : terminals) {
        if (t < 1 || t > *nodes) {
            throw ParseError(ParseError::Kind::TerminalOutOfRange, lineno,
                             "terminal " + std::to_string(t));
        }
        instance.terminals.push_back(static_cast<Vertex>(t - 1));
    }
    if (declared_terminals && *declared_terminals != static_cast<long>(terminals.size())) {
        throw ParseError(ParseError::Kind::CountMismatch, 0,
                         "declared " + std::to_string(*declared_terminals) +
                             " terminals, found " + std::to_string(terminals.size()));
    }
    if (instance.terminals.empty()) {
        throw ParseError(ParseError::Kind::NoTerminals, 0, "Terminals section is empty");
    }
    try {
        instance.validate();
    } catch (const GraphError& err) {
        throw ParseError(ParseError::Kind::Disconnected, 0, err.what());
    }
    if (!instance.known_opt) instance.known_opt = steinlib_known_optimum(instance.name);
    return instance;
}

StpInstance read_steinlib_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    auto instance = parse_steinlib(buf.str());
    if (instance.name.empty()) {
        instance.name = path.stem().string();
        if (!instance.known_opt) instance.known_opt = steinlib_known_optimum(instance.name);
    }
    return instance;
}

std::string format_real(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return {buf.data(), ptr};
}

std::string write_steinlib(const StpInstance& instance) {
    std::ostringstream out;
    out << "33D32945 STP File, STP Format Version 1.0\n\n";
    out << "SECTION Comment\n";
    out << "Name    \"" << instance.name << "\"\n";
    out << "Creator \"steinrl\"\n";
    if (instance.known_opt) out << "Optimum " << format_real(*instance.known_opt) << "\n";
    if (instance.bound) out << "Bound   " << format_real(*instance.bound) << "\n";
    out << "END\n\n";
    out << "SECTION Graph\n";
    out << "Nodes " << instance.graph.vertex_count() << "\n";
    out << "Edges " << instance.graph.edge_count() << "\n";
    for (const auto& e : instance.graph.edges()) {
        out << "E " << e.u + 1 << " " << e.v + 1 << " " << format_real(e.w) << "\n";
    }
    out << "END\n\n";
    out << "SECTION Terminals\n";
    out << "Terminals " << instance.terminals.size() << "\n";
    for (Vertex t : instance.terminals) out << "T " << t + 1 << "\n";
    out << "END\n\nEOF\n";
    return out.str();
}

void write_steinlib_file(const StpInstance& instance, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << write_steinlib(instance);
}

std::optional<double> steinlib_known_optimum(std::string_view name) {
    static constexpr std::pair<std::string_view, double> kTable[] = {
        {"b02", 83},     {"b03", 138},    {"b04", 59},     {"b05", 61},     {"b10", 86},
        {"b11", 88},     {"lin01", 503},  {"lin02", 557},  {"lin03", 926},  {"lin04", 1239},
        {"lin05", 1703}, {"lin06", 1348},
    };
    auto key = lower(name);
    for (auto [n, v] : kTable) {
        if (n == key) return v;
    }
    return std::nullopt;
}

}  // namespace steinrl
