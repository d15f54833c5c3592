#include "lexer.hh"

#include <cctype>

namespace mpst::detail {

const char* describe(Tok t) {
    switch (t) {
    case Tok::ident: return "identifier";
    case Tok::arrow: return "'->'";
    case Tok::squiggle: return "'~>'";
    case Tok::dash2: return "'--'";
    case Tok::long_arrow: return "'-->'";
    case Tok::colon: return "':'";
    case Tok::semi: return "';'";
    case Tok::dot: return "'.'";
    case Tok::comma: return "','";
    case Tok::lbrace: return "'{'";
    case Tok::rbrace: return "'}'";
    case Tok::lbrack: return "'['";
    case Tok::rbrack: return "']'";
    case Tok::bang: return "'!'";
    case Tok::query: return "'?'";
    case Tok::eq: return "'='";
    case Tok::bar: return "'|'";
    case Tok::plus: return "'+'";
    case Tok::oplus: return "'(+)'";
    case Tok::amp: return "'&'";
    case Tok::eof: return "end of input";
    }
    return "?";
}

namespace {

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_'; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '\''; }

} // namespace

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0, line = 1, col = 1;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    auto emit = [&](Tok k, std::size_t n) {
        out.push_back({k, std::string(src.substr(i, n)), line, col});
        advance(n);
    };
    while (i < src.size()) {
        unsigned char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        if (src.substr(i, 2) == "//") {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (ident_start(c) || std::isdigit(c)) {
            std::size_t j = i;
            while (j < src.size() && ident_char(src[j])) ++j;
            emit(Tok::ident, j - i);
            continue;
        }
        std::string_view rest = src.substr(i);
        if (rest.substr(0, 3) == "-->") emit(Tok::long_arrow, 3);
        else if (rest.substr(0, 3) == "(+)") emit(Tok::oplus, 3);
        else if (rest.substr(0, 2) == "->") emit(Tok::arrow, 2);
        else if (rest.substr(0, 2) == "~>") emit(Tok::squiggle, 2);
        else if (rest.substr(0, 2) == "--") emit(Tok::dash2, 2);
        else {
            Tok k;
            switch (c) {
            case ':': k = Tok::colon; break;
            case ';': k = Tok::semi; break;
            case '.': k = Tok::dot; break;
            case ',': k = Tok::comma; break;
            case '{': k = Tok::lbrace; break;
            case '}': k = Tok::rbrace; break;
            case '[': k = Tok::lbrack; break;
            case ']': k = Tok::rbrack; break;
            case '!': k = Tok::bang; break;
            case '?': k = Tok::query; break;
            case '=': k = Tok::eq; break;
            case '|': k = Tok::bar; break;
            case '+': k = Tok::plus; break;
            case '&': k = Tok::amp; break;
            default:
                throw ParseError(line, col, "unexpected character '" + std::string(1, char(c)) + "'");
            }
            emit(k, 1);
        }
    }
    out.push_back({Tok::eof, "", line, col});
    return out;
}

} // namespace mpst::detail
