#include "reinfix/java_syntax.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

namespace reinfix::java {

namespace {

const std::set<std::string, std::less<>>& keywords() {
    static const std::set<std::string, std::less<>> words = {
        "abstract", "assert",     "boolean",   "break",     "byte",      "case",     "catch",
        "char",     "class",      "const",     "continue",  "default",   "do",       "double",
        "else",     "enum",       "extends",   "final",     "finally",   "float",    "for",
        "goto",     "if",         "implements", "import",   "instanceof", "int",     "interface",
        "long",     "native",     "new",       "package",   "private",   "protected", "public",
        "return",   "short",      "static",    "strictfp",  "super",     "switch",   "synchronized",
        "this",     "throw",      "throws",    "transient", "try",       "void",     "volatile",
        "while",    "true",       "false",     "null",
    };
    return words;
}

// Longest operators first.
constexpr std::array<std::string_view, 29> kOperators = {
    ">>>=", "<<=", ">>=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=", "+=",
    "-=",   "*=",  "/=",  "%=",  "&=", "|=", "^=", "<<", "@",  "(",  ")",  "{",  "}",  ";",
};
constexpr std::string_view kSingles = "[].,=<>!~?:+-*/&|^%";

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80; }
bool ident_part(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

class Lexer {
  public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_space_and_comments();
            if (pos_ >= src_.size()) {
                break;
            }
            out.push_back(next());
        }
        Token end;
        end.kind = TokenKind::end;
        end.line = line_;
        end.end_line = line_;
        end.column = column();
        end.offset = src_.size();
        out.push_back(end);
        return out;
    }

  private:
    int column() const { return static_cast<int>(pos_ - line_start_) + 1; }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            line_start_ = pos_ + 1;
        }
        ++pos_;
    }

    bool starts_with(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

    void skip_space_and_comments() {
        while (pos_ < src_.size()) {
            unsigned char c = static_cast<unsigned char>(src_[pos_]);
            if (std::isspace(c)) {
                advance();
            } else if (starts_with("//")) {
                while (pos_ < src_.size() && src_[pos_] != '\n') {
                    advance();
                }
            } else if (starts_with("/*")) {
                int start = line_;
                advance();
                advance();
                while (pos_ < src_.size() && !starts_with("*/")) {
                    advance();
                }
                if (pos_ >= src_.size()) {
                    throw cpg::ParseError(start, "unterminated comment");
                }
                advance();
                advance();
            } else {
                return;
            }
        }
    }

    Token make(TokenKind kind, std::size_t begin, int line, int col) {
        Token t;
        t.kind = kind;
        t.text = std::string(src_.substr(begin, pos_ - begin));
        t.line = line;
        t.column = col;
        t.end_line = line_;
        t.offset = begin;
        return t;
    }

    Token next() {
        const std::size_t begin = pos_;
        const int line = line_;
        const int col = column();
        const unsigned char c = static_cast<unsigned char>(src_[pos_]);

        if (ident_start(c)) {
            while (pos_ < src_.size() && ident_part(static_cast<unsigned char>(src_[pos_]))) {
                advance();
            }
            Token t = make(TokenKind::identifier, begin, line, col);
            if (is_keyword(t.text)) {
                t.kind = TokenKind::keyword;
            }
            return t;
        }
        if (std::isdigit(c) || (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            lex_number();
            return make(TokenKind::number, begin, line, col);
        }
        if (starts_with("\"\"\"")) {
            for (int i = 0; i < 3; ++i) {
                advance();
            }
            while (pos_ < src_.size() && !starts_with("\"\"\"")) {
                if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) {
                    advance();
                }
                advance();
            }
            if (pos_ >= src_.size()) {
                throw cpg::ParseError(line, "unterminated text block");
            }
            for (int i = 0; i < 3; ++i) {
                advance();
            }
            return make(TokenKind::string, begin, line, col);
        }
        if (c == '"' || c == '\'') {
            const char quote = static_cast<char>(c);
            advance();
            while (pos_ < src_.size() && src_[pos_] != quote) {
                if (src_[pos_] == '\n') {
                    throw cpg::ParseError(line, "unterminated literal");
                }
                if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) {
                    advance();
                }
                advance();
            }
            if (pos_ >= src_.size()) {
                throw cpg::ParseError(line, "unterminated literal");
            }
            advance();
            return make(quote == '"' ? TokenKind::string : TokenKind::character, begin, line, col);
        }
        for (std::string_view op : kOperators) {
            if (starts_with(op)) {
                for (std::size_t i = 0; i < op.size(); ++i) {
                    advance();
                }
                return make(TokenKind::op, begin, line, col);
            }
        }
        if (kSingles.find(static_cast<char>(c)) != std::string_view::npos) {
            advance();
            return make(TokenKind::op, begin, line, col);
        }
        throw cpg::ParseError(line, std::string("unexpected character '") + static_cast<char>(c) + "'");
    }

    void lex_number() {
        auto digitish = [](unsigned char ch) { return std::isalnum(ch) || ch == '_' || ch == '.'; };
        while (pos_ < src_.size()) {
            unsigned char ch = static_cast<unsigned char>(src_[pos_]);
            if (digitish(ch)) {
                const bool exponent = (ch == 'e' || ch == 'E' || ch == 'p' || ch == 'P');
                advance();
                if (exponent && pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) {
                    advance();
                }
            } else {
                break;
            }
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    std::size_t line_start_ = 0;
};

}  // namespace

bool is_keyword(std::string_view word) { return keywords().count(word) > 0; }

std::vector<Token> lex(std::string_view source) { return Lexer(source).run(); }

}  // namespace reinfix::java
