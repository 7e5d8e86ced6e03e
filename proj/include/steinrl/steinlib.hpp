#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "steinrl/graph.hpp"

namespace steinrl {

class ParseError : public std::runtime_error {
public:
    enum class Kind {
        BadHeader,
        MissingSection,
        UnterminatedSection,
        Syntax,
        VertexOutOfRange,
        DuplicateEdge,
        SelfLoop,
        NonPositiveWeight,
        CountMismatch,
        TerminalOutOfRange,
        NoTerminals,
        Disconnected,
    };

    ParseError(Kind kind, int line, const std::string& detail);

    Kind kind() const { return kind_; }
    /// 1-based line number, 0 when the error is not tied to a line.
    int line() const { return line_; }

private:
    Kind kind_;
    int line_;
};

/// Reads the SteinLib STP text format. File vertex ids are 1-based and are
/// remapped to 0-based. Sections other than Comment, Graph and Terminals are
/// skipped. Comment keys `Name`, `Optimum` and `Bound` populate the matching
/// instance fields.
StpInstance parse_steinlib(std::string_view text);
StpInstance read_steinlib_file(const std::filesystem::path& path);

std::string write_steinlib(const StpInstance& instance);
void write_steinlib_file(const StpInstance& instance, const std::filesystem::path& path);

/// Published optimum for SteinLib instances we carry reference values for.
std::optional<double> steinlib_known_optimum(std::string_view name);

/// Shortest decimal text that reads back to exactly `value`.
std::string format_real(double value);

}  // namespace steinrl
