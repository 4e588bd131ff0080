#include "sbg/dsl.hpp"

#include <cctype>
#include <set>

namespace sbg::dsl {

namespace {

const std::set<std::string> kKeywords = {
    "ctrl", "atomic", "big", "react", "begin", "brs", "end", "init", "rules", "escalate",
};

bool ident_start(char c) { return std::islower(static_cast<unsigned char>(c)); }
bool ctrl_start(char c) { return std::isupper(static_cast<unsigned char>(c)); }
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

} // namespace

std::vector<Token> tokenize(const std::string& source) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    const std::size_t n = source.size();

    auto peek = [&](std::size_t k) -> char { return i + k < n ? source[i + k] : '\0'; };
    auto push = [&](TokenKind kind, std::string lexeme, int l, int c) {
        out.push_back(Token{kind, std::move(lexeme), l, c});
    };

    while (i < n) {
        char c = source[i];
        if (c == '\n') {
            ++i;
            ++line;
            col = 1;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
            ++col;
            continue;
        }
        if (c == '#') {
            while (i < n && source[i] != '\n') ++i;
            continue;
        }
        int tl = line, tc = col;
        if (ident_start(c) || ctrl_start(c)) {
            std::string lex(1, c);
            ++i;
            ++col;
            while (i < n) {
                if (ident_char(source[i])) {
                    lex += source[i++];
                    ++col;
                } else if (source[i] == '-' && i + 1 < n &&
                           std::isalnum(static_cast<unsigned char>(source[i + 1]))) {
                    // hyphenated identifiers (schema ids, name segments);
                    // `-` followed by `-` or `>` belongs to `-->`
                    lex += source[i++];
                    ++col;
                } else {
                    break;
                }
            }
            if (ctrl_start(c))
                push(TokenKind::ctrl_ident, lex, tl, tc);
            else if (kKeywords.count(lex))
                push(TokenKind::keyword, lex, tl, tc);
            else
                push(TokenKind::ident, lex, tl, tc);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string lex;
            while (i < n && std::isdigit(static_cast<unsigned char>(source[i]))) {
                lex += source[i++];
                ++col;
            }
            push(TokenKind::integer, lex, tl, tc);
            continue;
        }
        if (c == '-' && peek(1) == '-' && peek(2) == '>') {
            push(TokenKind::symbol, "-->", tl, tc);
            i += 3;
            col += 3;
            continue;
        }
        if (c == '|' && peek(1) == '|') {
            push(TokenKind::symbol, "||", tl, tc);
            i += 2;
            col += 2;
            continue;
        }
        if (c == '(' && peek(1) == ')') {
            push(TokenKind::symbol, "()", tl, tc);
            i += 2;
            col += 2;
            continue;
        }
        switch (c) {
        case '=':
        case ';':
        case '{':
        case '}':
        case '(':
        case ')':
        case '[':
        case ']':
        case ',':
        case '.':
        case '/':
        case '|':
        case '@':
            push(TokenKind::symbol, std::string(1, c), tl, tc);
            ++i;
            ++col;
            continue;
        default:
            fail(Errc::lex_error,
                 "illegal character '" + std::string(1, c) + "'", tl, tc);
        }
    }
    return out;
}

} // namespace sbg::dsl
