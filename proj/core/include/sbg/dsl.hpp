#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sbg/bigraph.hpp"
#include "sbg/rewrite.hpp"

namespace sbg::dsl {

enum class TokenKind { ident, ctrl_ident, symbol, keyword, integer, eof };

struct Token {
    TokenKind kind = TokenKind::eof;
    std::string lexeme;
    int line = 1;
    int column = 1;
};

// Longest-match lexing; `#` comments run to end of line.
std::vector<Token> tokenize(const std::string& source);

// --- AST --------------------------------------------------------------------

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Kind { ctrl, merge, closure, empty, site };
    Kind kind = Kind::empty;
    // ctrl
    std::string ctrl_name;
    std::vector<std::string> link_names;
    ExprPtr child; // nested contents, may be null
    // merge; `||` juxtaposes regions at the top level of a definition,
    // `|` merges everywhere, both merge inside a nesting
    ExprPtr left, right;
    bool parallel = false;
    // closure
    std::string closed_name;
    ExprPtr body;
    // site
    std::string site_name;
    int line = 0, column = 0;
};

// Flattened left-to-right operands of a (possibly nested) merge.
std::vector<ExprPtr> merge_operands(const ExprPtr& e);

struct CtrlDecl {
    std::string name;
    int arity = 0;
    bool atomic = false;
};

struct BigDef {
    std::string name;
    ExprPtr body;
};

struct ReactDef {
    std::string name;
    ExprPtr redex;
    ExprPtr reactum;
    std::optional<EscalationClause> escalation;
};

struct BrsBlock {
    std::optional<std::string> init_name; // either a named bigraph...
    ExprPtr init_expr;                    // ...or an inline expression
    std::vector<std::vector<std::string>> classes;
};

struct ProgramAst {
    std::vector<CtrlDecl> controls;
    std::vector<BigDef> bigs;
    std::vector<ReactDef> reacts;
    std::optional<BrsBlock> brs;
};

ProgramAst parse(const std::vector<Token>& tokens);

// --- elaborated program -------------------------------------------------------

struct ElabBigraph {
    Bigraph value;
    std::vector<std::string> site_names; // index-aligned with value's sites
};

struct ElabRule {
    ReactionRule rule;
    std::vector<std::string> redex_sites;
    std::vector<std::string> reactum_sites;
};

struct BrsDecl {
    std::optional<std::string> init_name;
    Bigraph init;
    std::vector<std::vector<std::string>> classes;
};

struct Program {
    Signature signature;
    std::vector<std::pair<std::string, ElabBigraph>> bigraphs; // definition order
    std::vector<ElabRule> rules;
    std::optional<BrsDecl> brs;

    const ElabBigraph* find_bigraph(const std::string& name) const;
    const ElabRule* find_rule(const std::string& name) const;
    // Engine-level spec for the program's brs block.
    BrsSpec to_brs_spec() const;
};

// Lower the AST onto core bigraph values. Rule redexes are checked for
// solidity here; rule outer-name sets are balanced by padding idle names so
// redex and reactum expose identical names.
Program elaborate(const ProgramAst& ast);

Program parse_program(const std::string& source);
Program load_program(const std::string& path);

// Canonical source rendering; parse(pretty_print(p)) elaborates to a
// program whose components are iso_eq to p's. Node labels are not
// expressible in the language and are dropped.
std::string pretty_print(const Program& p);

} // namespace sbg::dsl
