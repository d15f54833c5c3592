#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mpst/error.hh"

namespace mpst::detail {

enum class Tok {
    ident,
    arrow,       // ->
    squiggle,    // ~>
    dash2,       // --
    long_arrow,  // -->
    colon,
    semi,
    dot,
    comma,
    lbrace,
    rbrace,
    lbrack,
    rbrack,
    bang,
    query,
    eq,
    bar,
    plus,
    oplus,  // (+)
    amp,
    eof,
};

struct Token {
    Tok kind;
    std::string text;
    std::size_t line;
    std::size_t column;
};

std::vector<Token> lex(std::string_view src);
const char* describe(Tok t);

class Cursor {
public:
    explicit Cursor(std::vector<Token> toks) : toks_(std::move(toks)) {}

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    bool at(Tok t) const { return peek().kind == t; }
    bool at_ident(std::string_view word) const {
        return peek().kind == Tok::ident && peek().text == word;
    }
    const Token& next() {
        const Token& t = peek();
        if (pos_ < toks_.size() - 1) ++pos_;
        return t;
    }
    bool accept(Tok t) {
        if (!at(t)) return false;
        next();
        return true;
    }
    const Token& expect(Tok t) {
        if (!at(t)) fail(std::string("expected ") + describe(t));
        return next();
    }
    std::string ident() { return expect(Tok::ident).text; }
    void expect_word(std::string_view word) {
        if (!at_ident(word)) fail("expected '" + std::string(word) + "'");
        next();
    }
    [[noreturn]] void fail(const std::string& what) const { fail_at(peek(), what); }
    [[noreturn]] static void fail_at(const Token& t, const std::string& what) {
        std::string found = t.kind == Tok::eof ? "end of input" : "'" + t.text + "'";
        throw ParseError(t.line, t.column, what + ", found " + found);
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

} // namespace mpst::detail
