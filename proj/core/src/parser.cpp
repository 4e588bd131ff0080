#include "sbg/dsl.hpp"

namespace sbg::dsl {

namespace {

class Parser {
public:
    explicit Parser(const std::vector<Token>& tokens) : toks_(tokens) {}

    ProgramAst parse_program() {
        ProgramAst prog;
        while (!at_end()) {
            if (at_keyword("ctrl") || at_keyword("atomic")) {
                prog.controls.push_back(parse_ctrl());
            } else if (at_keyword("big")) {
                prog.bigs.push_back(parse_big());
            } else if (at_keyword("react")) {
                prog.reacts.push_back(parse_react());
            } else if (at_keyword("begin")) {
                if (prog.brs)
                    error("a single brs block", "second brs block");
                prog.brs = parse_brs();
            } else {
                error("ctrl, big, react or begin", describe(peek()));
            }
        }
        return prog;
    }

private:
    const std::vector<Token>& toks_;
    std::size_t pos_ = 0;

    static Token eof_token() { return Token{TokenKind::eof, "<eof>", 0, 0}; }

    const Token& peek(std::size_t k = 0) const {
        static const Token eof = eof_token();
        return pos_ + k < toks_.size() ? toks_[pos_ + k] : eof;
    }
    bool at_end() const { return pos_ >= toks_.size(); }
    bool at_symbol(const std::string& s) const {
        return peek().kind == TokenKind::symbol && peek().lexeme == s;
    }
    bool at_keyword(const std::string& s) const {
        return peek().kind == TokenKind::keyword && peek().lexeme == s;
    }

    static std::string describe(const Token& t) {
        return t.kind == TokenKind::eof ? "end of input" : "'" + t.lexeme + "'";
    }

    [[noreturn]] void error(const std::string& expected, const std::string& found) const {
        const Token& t = peek();
        int line = t.kind == TokenKind::eof && !toks_.empty() ? toks_.back().line : t.line;
        int col = t.kind == TokenKind::eof && !toks_.empty() ? toks_.back().column : t.column;
        fail(Errc::parse_error, "expected " + expected + ", found " + found, line, col);
    }

    Token advance() {
        if (at_end()) error("more input", "end of input");
        return toks_[pos_++];
    }
    Token expect_symbol(const std::string& s) {
        if (!at_symbol(s)) error("'" + s + "'", describe(peek()));
        return advance();
    }
    Token expect_keyword(const std::string& s) {
        if (!at_keyword(s)) error("'" + s + "'", describe(peek()));
        return advance();
    }
    Token expect(TokenKind kind, const std::string& what) {
        if (peek().kind != kind) error(what, describe(peek()));
        return advance();
    }

    CtrlDecl parse_ctrl() {
        CtrlDecl d;
        if (at_keyword("atomic")) {
            advance();
            d.atomic = true;
        }
        expect_keyword("ctrl");
        d.name = expect(TokenKind::ctrl_ident, "control name").lexeme;
        expect_symbol("=");
        d.arity = std::stoi(expect(TokenKind::integer, "arity").lexeme);
        expect_symbol(";");
        return d;
    }

    BigDef parse_big() {
        expect_keyword("big");
        BigDef d;
        d.name = expect(TokenKind::ident, "bigraph name").lexeme;
        expect_symbol("=");
        d.body = parse_expr();
        expect_symbol(";");
        return d;
    }

    ReactDef parse_react() {
        expect_keyword("react");
        ReactDef d;
        d.name = expect(TokenKind::ident, "rule name").lexeme;
        expect_symbol("=");
        d.redex = parse_expr();
        expect_symbol("-->");
        d.reactum = parse_expr();
        if (at_symbol("@")) d.escalation = parse_escalation();
        expect_symbol(";");
        return d;
    }

    std::optional<EscalationClause> parse_escalation() {
        expect_symbol("@");
        expect_keyword("escalate");
        expect_symbol("(");
        EscalationClause clause;
        clause.schema = expect(TokenKind::ident, "schema id").lexeme;
        if (at_symbol(";")) {
            advance();
            while (true) {
                std::string field = expect(TokenKind::ident, "field name").lexeme;
                expect_symbol("=");
                clause.fields.emplace_back(field, parse_selector());
                if (!at_symbol(",")) break;
                advance();
            }
        }
        expect_symbol(")");
        return clause;
    }

    Selector parse_selector() {
        Selector sel;
        const Token& t = peek();
        if (t.kind == TokenKind::integer) {
            sel.kind = Selector::Kind::int_lit;
            sel.value = std::stoll(advance().lexeme);
            return sel;
        }
        if (t.kind == TokenKind::ident) {
            std::string word = advance().lexeme;
            if (word == "true" || word == "false") {
                sel.kind = Selector::Kind::bool_lit;
                sel.flag = word == "true";
                return sel;
            }
            if (word == "scope") {
                sel.kind = Selector::Kind::scope;
                return sel;
            }
            if (word == "labels" || word == "count") {
                sel.kind = word == "labels" ? Selector::Kind::labels : Selector::Kind::count;
                expect_symbol("(");
                sel.control = expect(TokenKind::ctrl_ident, "control name").lexeme;
                expect_symbol(")");
                return sel;
            }
        }
        error("selector (labels(C), count(C), scope, integer or boolean)", describe(t));
    }

    BrsBlock parse_brs() {
        expect_keyword("begin");
        expect_keyword("brs");
        expect_keyword("init");
        BrsBlock blk;
        // `init` takes a named bigraph or an inline expression.
        if (peek().kind == TokenKind::ident && peek(1).kind == TokenKind::symbol &&
            peek(1).lexeme == ";") {
            blk.init_name = advance().lexeme;
        } else {
            blk.init_expr = parse_expr();
        }
        expect_symbol(";");
        expect_keyword("rules");
        expect_symbol("=");
        expect_symbol("[");
        while (true) {
            expect_symbol("{");
            std::vector<std::string> cls;
            if (!at_symbol("}")) {
                while (true) {
                    cls.push_back(expect(TokenKind::ident, "rule name").lexeme);
                    if (!at_symbol(",")) break;
                    advance();
                }
            }
            expect_symbol("}");
            blk.classes.push_back(std::move(cls));
            if (!at_symbol(",")) break;
            advance();
        }
        expect_symbol("]");
        expect_symbol(";");
        expect_keyword("end");
        return blk;
    }

    // expr      := closure ( ("|" | "||") closure )*
    // closure   := "/" name closure | nest
    // nest      := atom [ "." closure ]       (only controls may nest)
    // atom      := CTRL ["{" names "}"] | "(" expr ")" | "()" | "1" | site
    ExprPtr parse_expr() {
        ExprPtr lhs = parse_closure();
        while (at_symbol("|") || at_symbol("||")) {
            Token op = advance();
            ExprPtr rhs = parse_closure();
            auto e = std::make_shared<Expr>();
            e->kind = Expr::Kind::merge;
            e->left = lhs;
            e->right = rhs;
            e->parallel = op.lexeme == "||";
            e->line = op.line;
            e->column = op.column;
            lhs = e;
        }
        return lhs;
    }

    ExprPtr parse_closure() {
        if (at_symbol("/")) {
            Token slash = advance();
            std::string name = expect(TokenKind::ident, "link name").lexeme;
            ExprPtr body = parse_closure();
            auto e = std::make_shared<Expr>();
            e->kind = Expr::Kind::closure;
            e->closed_name = name;
            e->body = body;
            e->line = slash.line;
            e->column = slash.column;
            return e;
        }
        return parse_nest();
    }

    ExprPtr parse_nest() {
        ExprPtr a = parse_atom();
        if (at_symbol(".")) {
            if (a->kind != Expr::Kind::ctrl)
                error("a control before '.'", describe(peek()));
            advance();
            auto e = std::make_shared<Expr>(*a);
            e->child = parse_closure();
            return e;
        }
        return a;
    }

    ExprPtr parse_atom() {
        const Token& t = peek();
        auto e = std::make_shared<Expr>();
        e->line = t.line;
        e->column = t.column;
        if (t.kind == TokenKind::ctrl_ident) {
            advance();
            e->kind = Expr::Kind::ctrl;
            e->ctrl_name = t.lexeme;
            if (at_symbol("{")) {
                advance();
                while (true) {
                    e->link_names.push_back(expect(TokenKind::ident, "link name").lexeme);
                    if (!at_symbol(",")) break;
                    advance();
                }
                expect_symbol("}");
            }
            return e;
        }
        if (t.kind == TokenKind::symbol && t.lexeme == "()") {
            advance();
            e->kind = Expr::Kind::empty;
            return e;
        }
        if (t.kind == TokenKind::integer && t.lexeme == "1") {
            advance();
            e->kind = Expr::Kind::empty;
            return e;
        }
        if (t.kind == TokenKind::symbol && t.lexeme == "(") {
            advance();
            ExprPtr inner = parse_expr();
            expect_symbol(")");
            return inner;
        }
        if (t.kind == TokenKind::ident) {
            advance();
            e->kind = Expr::Kind::site;
            e->site_name = t.lexeme;
            return e;
        }
        error("Expr", describe(t));
    }
};

} // namespace

std::vector<ExprPtr> merge_operands(const ExprPtr& e) {
    std::vector<ExprPtr> out;
    if (!e) return out;
    if (e->kind == Expr::Kind::merge) {
        auto l = merge_operands(e->left);
        auto r = merge_operands(e->right);
        out.insert(out.end(), l.begin(), l.end());
        out.insert(out.end(), r.begin(), r.end());
    } else {
        out.push_back(e);
    }
    return out;
}

ProgramAst parse(const std::vector<Token>& tokens) {
    return Parser(tokens).parse_program();
}

} // namespace sbg::dsl
