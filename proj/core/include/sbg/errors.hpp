#pragma once

#include <stdexcept>
#include <string>

namespace sbg {

// Stable error codes carried by every sbg::Error. CLI maps domain errors
// to exit code 1; usage-level problems are handled before any of these
// are thrown.
enum class Errc {
    // bigraph-core
    interface_mismatch,
    signature_conflict,
    not_prime,
    unknown_name,
    // brs-dsl
    lex_error,
    parse_error,
    unknown_control,
    arity_mismatch,
    unbound_site,
    duplicate_name,
    atomic_nesting,
    // match-engine
    redex_not_solid,
    size_limit,
    // rewrite-engine
    stale_occurrence,
    pattern_not_solid,
    // spatial
    unknown_category,
    duplicate_sibling_label,
    missing_label,
    invalid_label,
    invalid_name,
    not_found,
    ambiguous,
    atomic_scope,
    unknown_boundary_name,
    scope_missing,
    // agent-sim
    validation_error,
    static_schema_violation,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message, int line = 0, int column = 0)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message),
          code_(code), line_(line), column_(column) {}

    Errc code() const { return code_; }
    int line() const { return line_; }
    int column() const { return column_; }

private:
    Errc code_;
    int line_;
    int column_;
};

[[noreturn]] inline void fail(Errc code, std::string message, int line = 0, int column = 0) {
    throw Error(code, std::move(message), line, column);
}

} // namespace sbg
