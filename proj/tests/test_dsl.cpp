#include <doctest.h>

#include "sbg/dsl.hpp"
#include "testutil.hpp"

using namespace sbg;
using namespace sbg::dsl;

namespace {

bool rules_equivalent(const ElabRule& a, const ElabRule& b) {
    return a.rule.name == b.rule.name && iso_eq(a.rule.redex, b.rule.redex) &&
           iso_eq(a.rule.reactum, b.rule.reactum) && a.rule.eta == b.rule.eta &&
           a.rule.escalation == b.rule.escalation;
}

bool programs_equivalent(const Program& a, const Program& b) {
    if (a.signature != b.signature) return false;
    if (a.bigraphs.size() != b.bigraphs.size() || a.rules.size() != b.rules.size()) return false;
    for (std::size_t i = 0; i < a.bigraphs.size(); ++i) {
        if (a.bigraphs[i].first != b.bigraphs[i].first) return false;
        if (!iso_eq(a.bigraphs[i].second.value, b.bigraphs[i].second.value)) return false;
    }
    for (std::size_t i = 0; i < a.rules.size(); ++i)
        if (!rules_equivalent(a.rules[i], b.rules[i])) return false;
    if (a.brs.has_value() != b.brs.has_value()) return false;
    if (a.brs) {
        if (a.brs->classes != b.brs->classes) return false;
        if (!iso_eq(a.brs->init, b.brs->init)) return false;
    }
    return true;
}

} // namespace

TEST_SUITE("dsl") {

TEST_CASE("tokenize: rule header") {
    auto toks = tokenize("react shutdown_nodes =");
    REQUIRE(toks.size() == 3);
    CHECK(toks[0].kind == TokenKind::keyword);
    CHECK(toks[0].lexeme == "react");
    CHECK(toks[1].kind == TokenKind::ident);
    CHECK(toks[1].lexeme == "shutdown_nodes");
    CHECK(toks[2].kind == TokenKind::symbol);
    CHECK(toks[2].lexeme == "=");
}

TEST_CASE("tokenize: empty input") {
    CHECK(tokenize("").empty());
}

TEST_CASE("tokenize: control with a link name") {
    auto toks = tokenize("Node{x}");
    REQUIRE(toks.size() == 4);
    CHECK(toks[0].kind == TokenKind::ctrl_ident);
    CHECK(toks[1].lexeme == "{");
    CHECK(toks[2].kind == TokenKind::ident);
    CHECK(toks[3].lexeme == "}");
}

TEST_CASE("tokenize: comments and positions") {
    auto toks = tokenize("# header\nbig a = ();\n");
    REQUIRE_FALSE(toks.empty());
    CHECK(toks[0].lexeme == "big");
    CHECK(toks[0].line == 2);
    CHECK(toks[0].column == 1);
}

TEST_CASE("tokenize: hyphenated identifiers do not eat arrows") {
    auto toks = tokenize("presence-v1 A-->B");
    REQUIRE(toks.size() == 4);
    CHECK(toks[0].lexeme == "presence-v1");
    CHECK(toks[1].lexeme == "A");
    CHECK(toks[2].lexeme == "-->");
    CHECK(toks[3].lexeme == "B");
}

TEST_CASE("tokenize: illegal character carries its position") {
    try {
        tokenize("big a = $;");
        FAIL("expected LexError");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::lex_error);
        CHECK(e.line() == 1);
        CHECK(e.column() == 9);
    }
}

TEST_CASE("parse: the meeting-room listing") {
    std::string src = testutil::slurp(testutil::fixture("listing1.big"));
    ProgramAst ast = parse(tokenize(src));
    REQUIRE(ast.reacts.size() == 1);
    const ReactDef& r = ast.reacts[0];
    CHECK(r.name == "shutdown_nodes");
    REQUIRE(r.redex->kind == Expr::Kind::closure);
    CHECK(r.redex->closed_name == "x");
    const ExprPtr& room = r.redex->body;
    REQUIRE(room->kind == Expr::Kind::ctrl);
    CHECK(room->ctrl_name == "MeetingRoom");
    auto operands = merge_operands(room->child);
    REQUIRE(operands.size() == 3);
    CHECK(operands[0]->kind == Expr::Kind::ctrl); // Users.()
    CHECK(operands[1]->kind == Expr::Kind::ctrl); // Node{x}
    CHECK(operands[2]->kind == Expr::Kind::site);
    CHECK(operands[2]->site_name == "rest");
    REQUIRE(ast.brs.has_value());
    CHECK(ast.brs->init_name == std::optional<std::string>("room"));
    CHECK(ast.brs->classes == std::vector<std::vector<std::string>>{{"shutdown_nodes"}});
}

TEST_CASE("parse: empty nest") {
    ProgramAst ast = parse(tokenize("ctrl A = 0; big a = A.();"));
    REQUIRE(ast.bigs.size() == 1);
    CHECK(ast.bigs[0].body->kind == Expr::Kind::ctrl);
    REQUIRE(ast.bigs[0].body->child);
    CHECK(ast.bigs[0].body->child->kind == Expr::Kind::empty);
}

TEST_CASE("parse: missing reactum is a parse error with a position") {
    std::string src = "ctrl A = 0;\nreact r = A --> ;";
    try {
        parse(tokenize(src));
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::parse_error);
        CHECK(std::string(e.what()).find("Expr") != std::string::npos);
        CHECK(e.line() >= 1);
        CHECK(e.line() <= 2);
        CHECK(e.column() >= 1);
    }
}

TEST_CASE("elaborate: the meeting-room listing") {
    Program p = parse_program(testutil::slurp(testutil::fixture("listing1.big")));
    REQUIRE(p.rules.size() == 1);
    const ElabRule& r = p.rules[0];
    CHECK(r.rule.redex.nodes.size() == 3);
    CHECK(r.rule.reactum.nodes.size() == 1);
    CHECK(r.redex_sites == std::vector<std::string>{"rest"});
    CHECK(r.reactum_sites == std::vector<std::string>{"rest"});
    CHECK(r.rule.eta == std::vector<int>{0});
    // x was closed in the redex and never resurfaces
    CHECK(r.rule.redex.iface.outer_names.empty());
    CHECK(r.rule.reactum.iface.outer_names.empty());
    CHECK(r.rule.redex.edges.size() == 1);
}

TEST_CASE("elaborate: reactum site not bound in redex") {
    std::string src = "ctrl A = 0;\nreact r = A.(s) --> A.(extra);";
    try {
        parse_program(src);
        FAIL("expected UnboundSite");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unbound_site);
    }
}

TEST_CASE("elaborate: port braces against declared arity") {
    std::string src = "atomic ctrl Node = 1;\nbig a = Node{x,y};";
    try {
        parse_program(src);
        FAIL("expected ArityMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::arity_mismatch);
    }
}

TEST_CASE("elaborate: undeclared control") {
    try {
        parse_program("big a = Mystery.();");
        FAIL("expected UnknownControl");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unknown_control);
    }
}

TEST_CASE("elaborate: duplicate definitions") {
    try {
        parse_program("ctrl A = 0; ctrl A = 1;");
        FAIL("expected DuplicateName");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::duplicate_name);
    }
}

TEST_CASE("elaborate: duplicate reactum sites express duplication") {
    Program p = parse_program("ctrl A = 0;\nreact copy = A.(s) --> A.(s) | A.(s);");
    REQUIRE(p.rules.size() == 1);
    CHECK(p.rules[0].rule.eta == std::vector<int>{0, 0});
}

TEST_CASE("elaborate: atomic controls cannot nest") {
    try {
        parse_program("atomic ctrl N = 0;\nbig a = N.(N);");
        FAIL("expected AtomicNesting");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::atomic_nesting);
    }
}

TEST_CASE("pretty_print: listing round-trips to iso-equal rules") {
    Program p = parse_program(testutil::slurp(testutil::fixture("listing1.big")));
    Program q = parse_program(pretty_print(p));
    CHECK(programs_equivalent(p, q));
}

TEST_CASE("pretty_print: empty program prints nothing") {
    CHECK(pretty_print(Program{}) == "");
}

TEST_CASE("pretty_print: escalation clauses survive the round trip") {
    Program p = parse_program(testutil::slurp(testutil::fixture("meeting_room/model.big")));
    std::string text = pretty_print(p);
    CHECK(text.find("@escalate(presence-v1; users=labels(Person), count=count(Person))") !=
          std::string::npos);
    Program q = parse_program(text);
    CHECK(programs_equivalent(p, q));
    REQUIRE(q.find_rule("presence_ping"));
    CHECK(q.find_rule("presence_ping")->rule.escalation ==
          p.find_rule("presence_ping")->rule.escalation);
}

TEST_CASE("pretty_print: rules keep definition order") {
    Program p = parse_program("ctrl A = 0; ctrl B = 0;\n"
                              "react second_first = A --> B;\n"
                              "react alpha = B --> A;\n");
    std::string text = pretty_print(p);
    CHECK(text.find("second_first") < text.find("alpha"));
}

TEST_CASE("property: fuzzed programs round-trip through the printer") {
    testutil::Rng rng(41);
    int ok = 0;
    for (int i = 0; i < 120; ++i) {
        std::string src = testutil::rand_program_source(rng);
        CAPTURE(src);
        Program p = parse_program(src);
        Program q = parse_program(pretty_print(p));
        CHECK_MESSAGE(programs_equivalent(p, q), "source:\n", src);
        ++ok;
    }
    CHECK(ok == 120);
}

TEST_CASE("property: parse errors stay within the source bounds") {
    testutil::Rng rng(47);
    int errors = 0;
    for (int i = 0; i < 100; ++i) {
        std::string src = testutil::rand_program_source(rng);
        // truncate mid-stream to provoke parse failures
        std::size_t cut = 1 + static_cast<std::size_t>(rng() % (src.size() - 1));
        std::string broken = src.substr(0, cut);
        int lines = 1;
        for (char ch : broken) lines += ch == '\n';
        try {
            parse_program(broken);
        } catch (const Error& e) {
            ++errors;
            CHECK(e.line() >= 1);
            CHECK(e.line() <= lines);
            CHECK(e.column() >= 1);
        }
    }
    CHECK(errors > 30);
}

TEST_CASE("property: rule sides expose identical outer names") {
    testutil::Rng rng(43);
    for (int i = 0; i < 80; ++i) {
        Program p = parse_program(testutil::rand_program_source(rng));
        for (const auto& r : p.rules)
            CHECK(r.rule.redex.iface.outer_names == r.rule.reactum.iface.outer_names);
    }
}

} // TEST_SUITE
