#pragma once

// Reference grammar: a small statically typed object-oriented subset with
// Java surface syntax (packages, imports, classes, interfaces, enums, records,
// fields, methods, constructors, if/while/do/for/switch/try, assignments, calls,
// lambdas and anonymous classes).

#include "reinfix/cpg.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace reinfix::java {

enum class TokenKind { identifier, keyword, number, string, character, op, end };

struct Token {
    TokenKind kind = TokenKind::end;
    std::string text;
    int line = 0;
    int column = 0;
    int end_line = 0;  // differs from `line` only for text blocks
    std::size_t offset = 0;
};

/// Tokenizes `source`, dropping comments. Throws cpg::ParseError on
/// unterminated literals or comments and stray characters.
std::vector<Token> lex(std::string_view source);

bool is_keyword(std::string_view word);

class JavaSubsetParser final : public cpg::SourceParser {
  public:
    explicit JavaSubsetParser(std::string extension = ".java") : extension_(std::move(extension)) {}

    std::string_view language_tag() const override { return "java-subset"; }
    bool accepts(const std::filesystem::path& file) const override;
    void parse(const cpg::SourceUnit& unit, cpg::NodeId file_node, cpg::GraphBuilder& builder) const override;

  private:
    std::string extension_;
};

/// Checks that `member_text` is one well-formed class member (typically a
/// complete method declaration). Throws cpg::ParseError otherwise.
void check_member_syntax(std::string_view member_text);

}  // namespace reinfix::java
