#include "reinfix/java_syntax.hpp"

#include <algorithm>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>

namespace reinfix::java {

using cpg::CpgNode;
using cpg::EdgeKind;
using cpg::GraphBuilder;
using cpg::NodeId;
using cpg::NodeKind;
using cpg::ParseError;

namespace {

const std::set<std::string, std::less<>> kModifiers = {
    "public", "protected", "private", "static",  "final",    "abstract", "native",
    "synchronized", "transient", "volatile", "strictfp", "default", "sealed",
};

const std::set<std::string, std::less<>> kPrimitives = {
    "boolean", "byte", "char", "short", "int", "long", "float", "double", "void",
};

const std::set<std::string, std::less<>> kAssignOps = {
    "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>=",
};

using Stops = std::initializer_list<std::string_view>;

struct Occurrence {
    std::string name;
    int line = 0;
    bool this_qualified = false;
    bool member = false;  // `expr.name`: never resolved to a local or field
};

struct ClassScope {
    NodeId node = 0;
    std::string name;
    std::map<std::string, NodeId> fields;
};

class Parser {
  public:
    Parser(const cpg::SourceUnit& unit, NodeId file_node, GraphBuilder& builder)
        : unit_(unit), toks_(lex(unit.content)), builder_(builder), file_node_(file_node) {
        owner_ = file_node;
        containers_.push_back(file_node);
    }

    void compilation_unit() {
        skip_annotations();
        if (is_kw("package")) {
            advance();
            qualified_name();
            expect(";");
        }
        while (is_kw("import")) {
            import_decl();
        }
        while (!at_end()) {
            if (is_op(";")) {
                advance();
                continue;
            }
            type_decl();
        }
    }

    void single_member() {
        // Parses a synthetic `class __probe { <member> }` wrapper.
        type_decl();
        if (!at_end()) {
            fail("unexpected text after member");
        }
    }

  private:
    // ---- token helpers -------------------------------------------------

    const Token& peek(std::size_t ahead = 0) const {
        const std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[i];
    }
    const Token& prev() const { return toks_[pos_ == 0 ? 0 : pos_ - 1]; }
    bool at_end() const { return peek().kind == TokenKind::end; }
    bool is_op(std::string_view op, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == TokenKind::op && t.text == op;
    }
    bool is_kw(std::string_view kw, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == TokenKind::keyword && t.text == kw;
    }
    bool is_ident(std::size_t ahead = 0) const { return peek(ahead).kind == TokenKind::identifier; }
    bool is_ident_text(std::string_view text, std::size_t ahead = 0) const {
        return is_ident(ahead) && peek(ahead).text == text;
    }
    const Token& advance() {
        if (at_end()) {
            fail("unexpected end of file");
        }
        return toks_[pos_++];
    }
    [[noreturn]] void fail(const std::string& message) const { throw ParseError(peek().line, message); }
    const Token& expect(std::string_view op) {
        if (!is_op(op)) {
            fail("expected '" + std::string(op) + "' but found '" + peek().text + "'");
        }
        return advance();
    }
    const Token& expect_ident() {
        if (!is_ident()) {
            fail("expected identifier but found '" + peek().text + "'");
        }
        return advance();
    }
    int last_line() const { return prev().end_line; }

    std::string source_text(std::size_t first, std::size_t last_inclusive) const {
        if (last_inclusive < first || last_inclusive >= toks_.size()) {
            return {};
        }
        const Token& a = toks_[first];
        const Token& b = toks_[last_inclusive];
        std::string out = unit_.content.substr(a.offset, b.offset + b.text.size() - a.offset);
        std::string collapsed;
        bool space = false;
        for (char c : out) {
            if (c == '\n' || c == '\r' || c == '\t' || c == ' ') {
                space = true;
                continue;
            }
            if (space && !collapsed.empty()) {
                collapsed.push_back(' ');
            }
            space = false;
            collapsed.push_back(c);
        }
        return collapsed;
    }

    std::size_t matching_close(std::size_t open_index) const {
        const std::string& open = toks_[open_index].text;
        const std::string close = open == "(" ? ")" : open == "[" ? "]" : "}";
        int depth = 0;
        for (std::size_t i = open_index; i < toks_.size(); ++i) {
            const Token& t = toks_[i];
            if (t.kind != TokenKind::op) {
                continue;
            }
            if (t.text == "(" || t.text == "[" || t.text == "{") {
                ++depth;
            } else if (t.text == ")" || t.text == "]" || t.text == "}") {
                --depth;
                if (depth == 0) {
                    if (t.text != close) {
                        throw ParseError(t.line, "mismatched '" + t.text + "'");
                    }
                    return i;
                }
            }
        }
        throw ParseError(toks_[open_index].line, "unbalanced '" + open + "'");
    }

    void skip_balanced() { pos_ = matching_close(pos_) + 1; }

    // ---- graph helpers -------------------------------------------------

    NodeId add_node(NodeKind kind, std::string name, const Token& at) {
        CpgNode n;
        n.kind = kind;
        n.name = std::move(name);
        n.location = {unit_.path, at.line, at.end_line};
        n.column = at.column;
        return builder_.add_node(std::move(n));
    }
    void set_end(NodeId id, int end_line) {
        auto& n = builder_.node(id);
        n.location.end_line = std::max(n.location.start_line, end_line);
    }
    void contain(NodeId child) { builder_.add_edge(containers_.back(), child, EdgeKind::contains); }

    std::optional<NodeId> resolve(const Occurrence& occ) const {
        if (occ.member) {
            return std::nullopt;
        }
        if (!occ.this_qualified) {
            for (auto it = locals_.rbegin(); it != locals_.rend(); ++it) {
                if (auto f = it->find(occ.name); f != it->end()) {
                    return f->second;
                }
            }
        }
        for (auto it = classes_.rbegin(); it != classes_.rend(); ++it) {
            if (auto f = it->fields.find(occ.name); f != it->fields.end()) {
                return f->second;
            }
            if (occ.this_qualified) {
                break;
            }
        }
        return std::nullopt;
    }

    NodeId declare_variable(const Token& name_tok, std::string type_text, std::string role) {
        NodeId v = add_node(NodeKind::variable, name_tok.text, name_tok);
        auto& n = builder_.node(v);
        n.type_text = std::move(type_text);
        n.role = std::move(role);
        builder_.add_edge(owner_, v, EdgeKind::defines);
        if (role_is_field(builder_.node(v).role)) {
            classes_.back().fields[name_tok.text] = v;
        } else if (!locals_.empty()) {
            locals_.back()[name_tok.text] = v;
        }
        return v;
    }
    static bool role_is_field(const std::string& role) { return role == "field" || role == "enum-constant"; }

    void flush_reads(std::vector<Occurrence>& reads, std::optional<NodeId> consumer, std::string_view context) {
        for (const auto& occ : reads) {
            auto target = resolve(occ);
            if (!target) {
                continue;
            }
            builder_.add_edge(consumer.value_or(owner_), *target, EdgeKind::uses, occ.line, std::string(context));
            if (consumer) {
                builder_.add_edge(*target, *consumer, EdgeKind::flows_to);
            }
        }
        reads.clear();
    }

    NodeId make_assignment(const Occurrence* target, const Token& at, std::string op, std::string role) {
        NodeId a = add_node(NodeKind::assignment, target ? target->name : std::string{}, at);
        auto& n = builder_.node(a);
        n.detail = std::move(op);
        n.role = std::move(role);
        contain(a);
        if (target) {
            if (auto var = resolve(*target)) {
                builder_.add_edge(a, *var, EdgeKind::assigns);
                builder_.add_edge(a, *var, EdgeKind::flows_to);
            }
        }
        return a;
    }

    // ---- declarations --------------------------------------------------

    void import_decl() {
        const Token& kw = advance();
        bool is_static = false;
        if (is_kw("static")) {
            advance();
            is_static = true;
        }
        std::string name = qualified_name();
        if (is_op(".") && is_op("*", 1)) {
            advance();
            advance();
            name += ".*";
        }
        expect(";");
        NodeId imp = add_node(NodeKind::import, name, kw);
        set_end(imp, last_line());
        builder_.node(imp).value = is_static ? "static" : "";
        builder_.add_edge(file_node_, imp, EdgeKind::imports);
    }

    std::string qualified_name() {
        std::string name = expect_ident().text;
        while (is_op(".") && is_ident(1)) {
            advance();
            name += "." + advance().text;
        }
        return name;
    }

    void skip_annotations() {
        while (is_op("@") && !is_kw("interface", 1)) {
            advance();
            qualified_name();
            if (is_op("(")) {
                skip_balanced();
            }
        }
    }

    void skip_modifiers() {
        while (true) {
            skip_annotations();
            const Token& t = peek();
            if ((t.kind == TokenKind::keyword || t.kind == TokenKind::identifier) && kModifiers.count(t.text) &&
                !(t.text == "sealed" && !is_kw("class", 1) && !is_kw("interface", 1) && !is_kw("abstract", 1))) {
                if (t.text == "synchronized" && is_op("(", 1)) {
                    return;
                }
                advance();
                continue;
            }
            return;
        }
    }

    bool at_type_decl_keyword() const {
        return is_kw("class") || is_kw("interface") || is_kw("enum") || (is_op("@") && is_kw("interface", 1)) ||
               (is_ident_text("record") && is_ident(1) && (is_op("(", 2) || is_op("<", 2)));
    }

    void type_decl() {
        skip_annotations();
        const Token& first = peek();
        skip_modifiers();
        if (!at_type_decl_keyword()) {
            fail("expected class, interface, enum or record declaration");
        }
        std::string flavour;
        if (is_op("@")) {
            advance();
            advance();
            flavour = "interface";
        } else {
            flavour = advance().text;
        }
        const Token& name = expect_ident();
        NodeId cls = add_node(NodeKind::class_decl, name.text, first);
        builder_.node(cls).role = flavour;
        builder_.add_edge(containers_.back(), cls, EdgeKind::contains);

        if (is_op("<")) {
            skip_angle();
        }
        ClassScope scope{cls, name.text, {}};
        classes_.push_back(std::move(scope));
        const NodeId saved_owner = owner_;
        owner_ = cls;
        containers_.push_back(cls);

        if (flavour == "record") {
            expect("(");
            while (!is_op(")")) {
                skip_annotations();
                std::string type = type_text_or_fail();
                const Token& comp = expect_ident();
                declare_variable(comp, type, "field");
                if (!is_op(",")) {
                    break;
                }
                advance();
            }
            expect(")");
        }
        while (!is_op("{")) {
            if (at_end()) {
                fail("missing class body");
            }
            if (is_op("<")) {
                skip_angle();
                continue;
            }
            if (is_op("(") || is_op(";") || is_op("}")) {
                fail("unexpected '" + peek().text + "' in class header");
            }
            advance();  // extends/implements/permits clauses
        }
        class_body(flavour == "enum");
        set_end(cls, last_line());

        containers_.pop_back();
        owner_ = saved_owner;
        classes_.pop_back();
    }

    struct Deferred {
        enum class Kind { method_body, initializer, nested_type, anonymous_body } kind;
        std::size_t pos;
        NodeId node = 0;  // METHOD for bodies
        std::vector<NodeId> params;
    };

    void class_body(bool is_enum) {
        expect("{");
        std::vector<Deferred> deferred;
        if (is_enum) {
            enum_constants(deferred);
        }
        while (!is_op("}")) {
            if (at_end()) {
                fail("unterminated class body");
            }
            member(deferred);
        }
        const std::size_t close = pos_;

        // Second pass: bodies see every field of the class, including those
        // declared after them.
        for (const auto& d : deferred) {
            pos_ = d.pos;
            switch (d.kind) {
                case Deferred::Kind::method_body: method_body(d.node, d.params); break;
                case Deferred::Kind::initializer: initializer_block(); break;
                case Deferred::Kind::nested_type: type_decl(); break;
                case Deferred::Kind::anonymous_body: anonymous_class_body(peek()); break;
            }
        }
        pos_ = close;
        expect("}");
    }

    void enum_constants(std::vector<Deferred>& deferred) {
        while (!is_op(";") && !is_op("}")) {
            skip_annotations();
            const Token& name = expect_ident();
            NodeId v = declare_variable(name, classes_.back().name, "enum-constant");
            if (is_op("(")) {
                advance();
                std::vector<Occurrence> none;
                call_arguments(std::nullopt);
            }
            if (is_op("{")) {
                deferred.push_back({Deferred::Kind::anonymous_body, pos_, 0, {}});
                skip_balanced();
            }
            set_end(v, last_line());
            if (is_op(",")) {
                advance();
            } else {
                break;
            }
        }
        if (is_op(";")) {
            advance();
        }
    }

    void member(std::vector<Deferred>& deferred) {
        if (is_op(";")) {
            advance();
            return;
        }
        const std::size_t member_start = pos_;
        skip_annotations();
        const Token& first = peek();
        skip_modifiers();

        if (at_type_decl_keyword()) {
            deferred.push_back({Deferred::Kind::nested_type, member_start, 0, {}});
            while (!is_op("{")) {
                if (at_end()) {
                    fail("missing nested class body");
                }
                if (is_op("(")) {
                    skip_balanced();
                } else {
                    advance();
                }
            }
            skip_balanced();
            return;
        }
        if (is_op("{")) {
            deferred.push_back({Deferred::Kind::initializer, pos_, 0, {}});
            skip_balanced();
            return;
        }
        if (is_op("<")) {
            skip_angle();
        }

        if (is_ident() && peek().text == classes_.back().name && is_op("{", 1)) {
            // Compact record constructor.
            const Token& name = advance();
            NodeId m = add_node(NodeKind::method, name.text, first);
            contain(m);
            deferred.push_back({Deferred::Kind::method_body, pos_, m, {}});
            skip_balanced();
            set_end(m, last_line());
            return;
        }

        std::string return_type;
        const Token* name_tok = nullptr;
        if (is_ident() && peek().text == classes_.back().name && is_op("(", 1)) {
            name_tok = &advance();  // constructor
        } else {
            return_type = type_text_or_fail();
            name_tok = &expect_ident();
        }

        if (is_op("(")) {
            method_declaration(first, *name_tok, return_type, deferred);
            return;
        }
        field_declarators(return_type, *name_tok);
    }

    void method_declaration(const Token& first, const Token& name, const std::string& return_type,
                            std::vector<Deferred>& deferred) {
        NodeId m = add_node(NodeKind::method, name.text, first);
        builder_.node(m).type_text = return_type;
        contain(m);

        const NodeId saved_owner = owner_;
        owner_ = m;
        locals_.emplace_back();
        std::vector<NodeId> params;
        const std::size_t params_open = pos_;
        expect("(");
        while (!is_op(")")) {
            skip_modifiers();
            std::string type = type_text_or_fail();
            if (is_kw("this")) {  // receiver parameter
                advance();
            } else {
                const Token& p = expect_ident();
                std::string dims;
                while (is_op("[") && is_op("]", 1)) {
                    advance();
                    advance();
                    dims += "[]";
                }
                params.push_back(declare_variable(p, type + dims, "parameter"));
            }
            if (!is_op(",")) {
                break;
            }
            advance();
        }
        expect(")");
        builder_.node(m).detail = source_text(params_open + 1, pos_ - 2);
        locals_.pop_back();
        owner_ = saved_owner;

        while (is_op("[") && is_op("]", 1)) {
            advance();
            advance();
        }
        if (is_kw("throws")) {
            advance();
            type_text_or_fail();
            while (is_op(",")) {
                advance();
                type_text_or_fail();
            }
        }
        if (is_op("{")) {
            deferred.push_back({Deferred::Kind::method_body, pos_, m, params});
            skip_balanced();
        } else if (is_kw("default")) {  // annotation member default
            advance();
            while (!is_op(";")) {
                if (is_op("(") || is_op("{") || is_op("[")) {
                    skip_balanced();
                } else {
                    advance();
                }
            }
            expect(";");
        } else {
            expect(";");
        }
        set_end(m, last_line());
    }

    void field_declarators(const std::string& type, const Token& first_name) {
        const Token* name = &first_name;
        while (true) {
            std::string dims;
            while (is_op("[") && is_op("]", 1)) {
                advance();
                advance();
                dims += "[]";
            }
            NodeId v = declare_variable(*name, type + dims, "field");
            if (is_op("=")) {
                initializer(*name, v);
            }
            set_end(v, last_line());
            if (is_op(",")) {
                advance();
                name = &expect_ident();
                continue;
            }
            break;
        }
        expect(";");
    }

    // `name = <expr>` tail of a declarator; current token is '='.
    void initializer(const Token& name, NodeId /*variable*/) {
        advance();
        Occurrence target{name.text, name.line, false};
        NodeId a = make_assignment(&target, name, "=", "initializer");
        const std::size_t rhs_begin = pos_;
        containers_.push_back(a);
        containers_.pop_back();
        expression({",", ";"}, a, "assignment");
        builder_.node(a).value = source_text(rhs_begin, pos_ - 1);
        set_end(a, last_line());
    }

    void method_body(NodeId method, const std::vector<NodeId>& params) {
        const NodeId saved_owner = owner_;
        owner_ = method;
        containers_.push_back(method);
        locals_.emplace_back();
        for (NodeId p : params) {
            locals_.back()[builder_.node(p).name] = p;
        }
        block();
        locals_.pop_back();
        containers_.pop_back();
        owner_ = saved_owner;
    }

    void initializer_block() {
        locals_.emplace_back();
        block();
        locals_.pop_back();
    }

    void anonymous_class_body(const Token& at) {
        NodeId cls = add_node(NodeKind::class_decl, "", at);
        builder_.node(cls).role = "anonymous";
        contain(cls);
        classes_.push_back(ClassScope{cls, "", {}});
        const NodeId saved_owner = owner_;
        owner_ = cls;
        containers_.push_back(cls);
        class_body(false);
        set_end(cls, last_line());
        containers_.pop_back();
        owner_ = saved_owner;
        classes_.pop_back();
    }

    // ---- types ---------------------------------------------------------

    void skip_angle() {
        int depth = 0;
        do {
            const Token& t = advance();
            if (t.kind == TokenKind::op) {
                if (t.text == "<") {
                    ++depth;
                } else if (t.text == ">") {
                    --depth;
                } else if (t.text != "," && t.text != "." && t.text != "?" && t.text != "&" && t.text != "[" &&
                           t.text != "]" && t.text != "@") {
                    throw ParseError(t.line, "unexpected '" + t.text + "' in type arguments");
                }
            } else if (t.kind != TokenKind::identifier && t.kind != TokenKind::keyword) {
                throw ParseError(t.line, "unexpected '" + t.text + "' in type arguments");
            }
        } while (depth > 0);
    }

    // Attempts to parse a type at the current position. On failure restores
    // the position and returns nullopt.
    std::optional<std::string> try_type() {
        const std::size_t start = pos_;
        skip_annotations();
        const Token& t = peek();
        if (t.kind == TokenKind::keyword && kPrimitives.count(t.text)) {
            advance();
        } else if (t.kind == TokenKind::identifier) {
            advance();
            while (true) {
                if (is_op("<")) {
                    const std::size_t save = pos_;
                    try {
                        skip_angle();
                    } catch (const ParseError&) {
                        pos_ = save;
                        break;
                    }
                }
                if (is_op(".") && is_ident(1)) {
                    advance();
                    advance();
                    continue;
                }
                break;
            }
        } else {
            pos_ = start;
            return std::nullopt;
        }
        while (is_op("[") && is_op("]", 1)) {
            advance();
            advance();
        }
        if (is_op("...")) {
            advance();
        }
        return join_type(start, pos_);
    }

    std::string type_text_or_fail() {
        auto t = try_type();
        if (!t) {
            fail("expected a type but found '" + peek().text + "'");
        }
        return *t;
    }

    std::string join_type(std::size_t begin, std::size_t end) const {
        std::string out;
        for (std::size_t i = begin; i < end; ++i) {
            const Token& t = toks_[i];
            const bool word = t.kind == TokenKind::identifier || t.kind == TokenKind::keyword;
            if (!out.empty() && word) {
                const char last = out.back();
                if (std::isalnum(static_cast<unsigned char>(last)) || last == '_' || last == '$' || last == ']' ||
                    last == '>') {
                    out.push_back(' ');
                }
            }
            out += t.text;
            if (t.text == ",") {
                out.push_back(' ');
            }
        }
        return out;
    }

    // ---- statements ----------------------------------------------------

    void block() {
        expect("{");
        locals_.emplace_back();
        while (!is_op("}")) {
            if (at_end()) {
                fail("unterminated block");
            }
            statement();
        }
        advance();
        locals_.pop_back();
    }

    NodeId open_control(const Token& kw, std::string construct) {
        NodeId c = add_node(NodeKind::control_struct, construct, kw);
        builder_.node(c).construct = std::move(construct);
        contain(c);
        containers_.push_back(c);
        return c;
    }
    void close_control(NodeId c) {
        set_end(c, last_line());
        containers_.pop_back();
    }

    void parenthesized_condition(std::string_view context) {
        expect("(");
        expression({")"}, std::nullopt, context);
        expect(")");
    }

    bool at_local_type_decl() const {
        std::size_t i = 0;
        while (true) {
            const Token& t = peek(i);
            if ((t.kind == TokenKind::keyword || t.kind == TokenKind::identifier) && kModifiers.count(t.text) &&
                t.text != "synchronized" && t.text != "default") {
                ++i;
                continue;
            }
            break;
        }
        return is_kw("class", i) || is_kw("interface", i) || is_kw("enum", i) ||
               (is_ident_text("record", i) && is_ident(i + 1) && is_op("(", i + 2));
    }

    void statement() {
        const Token& t = peek();
        if (is_op("{")) {
            block();
        } else if (is_op(";")) {
            advance();
        } else if (is_kw("if")) {
            NodeId c = open_control(advance(), "if");
            parenthesized_condition("condition");
            statement();
            if (is_kw("else")) {
                advance();
                statement();
            }
            close_control(c);
        } else if (is_kw("while")) {
            NodeId c = open_control(advance(), "while");
            parenthesized_condition("condition");
            statement();
            close_control(c);
        } else if (is_kw("do")) {
            NodeId c = open_control(advance(), "while");
            statement();
            if (!is_kw("while")) {
                fail("expected 'while' after do body");
            }
            advance();
            parenthesized_condition("condition");
            expect(";");
            close_control(c);
        } else if (is_kw("for")) {
            for_statement();
        } else if (is_kw("switch")) {
            switch_construct(false);
        } else if (is_kw("try")) {
            try_statement();
        } else if (is_kw("return")) {
            advance();
            if (!is_op(";")) {
                expression({";"}, std::nullopt, "return");
            }
            expect(";");
        } else if (is_kw("throw")) {
            advance();
            expression({";"}, std::nullopt, "expression");
            expect(";");
        } else if (is_kw("break") || is_kw("continue")) {
            advance();
            if (is_ident()) {
                advance();
            }
            expect(";");
        } else if (is_kw("synchronized") && is_op("(", 1)) {
            advance();
            parenthesized_condition("expression");
            block();
        } else if (is_kw("assert")) {
            advance();
            expression({";", ":"}, std::nullopt, "condition");
            if (is_op(":")) {
                advance();
                expression({";"}, std::nullopt, "expression");
            }
            expect(";");
        } else if (is_kw("else") || is_kw("case") || is_kw("catch") || is_kw("finally")) {
            fail("unexpected '" + t.text + "'");
        } else if (at_local_type_decl()) {
            type_decl();
        } else if (is_ident_text("yield") && !is_op("=", 1) && !is_op("(", 1) && !is_op(".", 1) && !is_op("[", 1)) {
            advance();
            expression({";"}, std::nullopt, "return");
            expect(";");
        } else if (is_ident() && is_op(":", 1)) {
            advance();
            advance();
            statement();
        } else if (!try_local_declaration({";"})) {
            expression({";"}, std::nullopt, "expression");
            expect(";");
        }
    }

    // Local variable declaration with declarators, terminated by one of
    // `terminators` (consumed when it is ";"). Returns false without consuming
    // anything if the tokens do not start a declaration.
    bool try_local_declaration(Stops terminators, std::string role = "local") {
        const std::size_t start = pos_;
        skip_modifiers();
        auto type = try_type();
        if (!type || !is_ident() || !(is_op("=", 1) || is_op(";", 1) || is_op(",", 1) || is_op("[", 1) ||
                                      is_op(":", 1) || is_op(")", 1))) {
            pos_ = start;
            return false;
        }
        while (true) {
            const Token& name = advance();
            std::string dims;
            while (is_op("[") && is_op("]", 1)) {
                advance();
                advance();
                dims += "[]";
            }
            NodeId v = declare_variable(name, *type + dims, role);
            if (is_op("=")) {
                advance();
                Occurrence target{name.text, name.line, false};
                NodeId a = make_assignment(&target, name, "=", "initializer");
                const std::size_t rhs_begin = pos_;
                expression({",", ";", ")"}, a, "assignment");
                builder_.node(a).value = source_text(rhs_begin, pos_ - 1);
                set_end(a, last_line());
            }
            set_end(v, last_line());
            if (is_op(",")) {
                advance();
                if (!is_ident()) {
                    fail("expected declarator name");
                }
                continue;
            }
            break;
        }
        for (std::string_view term : terminators) {
            if (is_op(term)) {
                if (term == ";") {
                    advance();
                }
                return true;
            }
        }
        fail("expected ';' after declaration");
    }

    void for_statement() {
        NodeId c = open_control(advance(), "for");
        expect("(");
        locals_.emplace_back();
        // Enhanced for: [mods] Type name : iterable
        const std::size_t start = pos_;
        skip_modifiers();
        auto type = try_type();
        if (type && is_ident() && is_op(":", 1)) {
            declare_variable(advance(), *type, "loop-variable");
            advance();
            expression({")"}, std::nullopt, "iteration");
        } else {
            pos_ = start;
            if (!is_op(";")) {
                if (!try_local_declaration({";"})) {
                    expression_list({";"});
                    expect(";");
                }
            } else {
                advance();
            }
            if (!is_op(";")) {
                expression({";"}, std::nullopt, "condition");
            }
            expect(";");
            if (!is_op(")")) {
                expression_list({")"});
            }
        }
        expect(")");
        statement();
        locals_.pop_back();
        close_control(c);
    }

    void expression_list(Stops terminators) {
        while (true) {
            std::vector<std::string_view> stops(terminators);
            stops.push_back(",");
            expression_v(stops, std::nullopt, "expression");
            if (is_op(",")) {
                advance();
                continue;
            }
            return;
        }
    }

    void try_statement() {
        NodeId c = open_control(advance(), "try");
        locals_.emplace_back();
        if (is_op("(")) {
            advance();
            while (!is_op(")")) {
                if (!try_local_declaration({";", ")"}, "resource")) {
                    expression({";", ")"}, std::nullopt, "expression");
                }
                if (is_op(";")) {
                    advance();
                }
            }
            expect(")");
        }
        block();
        bool handled = false;
        while (is_kw("catch")) {
            handled = true;
            advance();
            expect("(");
            locals_.emplace_back();
            skip_modifiers();
            std::string type = type_text_or_fail();
            while (is_op("|")) {
                advance();
                type += " | " + type_text_or_fail();
            }
            declare_variable(expect_ident(), type, "catch-parameter");
            expect(")");
            block();
            locals_.pop_back();
        }
        if (is_kw("finally")) {
            handled = true;
            advance();
            block();
        }
        if (!handled && toks_[pos_ - 1].text != ")") {
            // try-with-resources may stand alone; a plain try may not
        }
        locals_.pop_back();
        close_control(c);
    }

    void switch_construct(bool as_expression) {
        NodeId c = open_control(advance(), "switch");
        parenthesized_condition("condition");
        expect("{");
        locals_.emplace_back();
        while (!is_op("}")) {
            if (at_end()) {
                fail("unterminated switch");
            }
            if (is_kw("case") || is_kw("default")) {
                const bool is_default = is_kw("default");
                advance();
                if (!is_default) {
                    while (true) {
                        expression({":", "->", ","}, std::nullopt, "condition");
                        if (is_op(",")) {
                            advance();
                            continue;
                        }
                        break;
                    }
                }
                if (is_op("->")) {
                    advance();
                    if (is_op("{")) {
                        block();
                    } else if (is_kw("throw")) {
                        statement();
                    } else {
                        expression({";"}, std::nullopt, as_expression ? "return" : "expression");
                        expect(";");
                    }
                } else {
                    expect(":");
                }
                continue;
            }
            statement();
        }
        advance();
        locals_.pop_back();
        close_control(c);
    }

    // ---- expressions ---------------------------------------------------

    void call_arguments(std::optional<NodeId> consumer) {
        // Current token follows '('.
        while (!is_op(")")) {
            expression({",", ")"}, consumer, "argument");
            if (is_op(",")) {
                advance();
            }
        }
        expect(")");
    }

    void expression(Stops stops, std::optional<NodeId> consumer, std::string_view context) {
        std::vector<std::string_view> v(stops);
        expression_v(v, consumer, context);
    }

    bool is_stop(const std::vector<std::string_view>& stops) const {
        const Token& t = peek();
        if (t.kind != TokenKind::op) {
            return false;
        }
        return std::find(stops.begin(), stops.end(), t.text) != stops.end();
    }

    void lambda_body(const std::vector<std::string_view>& stops, std::optional<NodeId> consumer,
                     std::string_view context) {
        if (is_op("{")) {
            block();
        } else {
            expression_v(stops, consumer, context);
        }
    }

    bool starts_operand(std::size_t ahead) const {
        const Token& t = peek(ahead);
        switch (t.kind) {
            case TokenKind::identifier:
            case TokenKind::number:
            case TokenKind::string:
            case TokenKind::character:
                return true;
            case TokenKind::keyword:
                return t.text == "this" || t.text == "super" || t.text == "new" || t.text == "null" ||
                       t.text == "true" || t.text == "false" || t.text == "switch";
            case TokenKind::op:
                return t.text == "(" || t.text == "!" || t.text == "~";
            case TokenKind::end:
                return false;
        }
        return false;
    }

    // `( Type ) operand` at the current '('. Consumes the parenthesized type
    // when it is a cast.
    bool try_cast() {
        const std::size_t start = pos_;
        advance();
        if (try_type() && is_op(")") && starts_operand(1)) {
            advance();
            return true;
        }
        pos_ = start;
        return false;
    }

    // Walks one expression up to a stop token at nesting depth 0 (not
    // consumed), emitting CALL and ASSIGNMENT nodes plus use and flow edges.
    void expression_v(const std::vector<std::string_view>& stops, std::optional<NodeId> consumer,
                      std::string_view context) {
        const bool arrow_is_stop = std::find(stops.begin(), stops.end(), "->") != stops.end();
        std::vector<Occurrence> reads;
        std::optional<Occurrence> lvalue;
        std::size_t lvalue_end = 0;
        std::optional<std::string> prefix_incdec;
        int ternary = 0;
        bool want = true;  // an operand is expected next
        const std::size_t begin = pos_;

        auto operand = [&] {
            if (!want) {
                fail("missing operator before '" + peek().text + "'");
            }
            want = false;
        };
        auto binary = [&] {
            if (want) {
                fail("missing operand before '" + peek().text + "'");
            }
            want = true;
        };

        while (true) {
            const Token& t = peek();
            if (t.kind == TokenKind::end) {
                fail("unexpected end of file in expression");
            }
            if (t.kind == TokenKind::op && t.text == ":" && ternary > 0) {
                binary();
                --ternary;
                advance();
                lvalue.reset();
                continue;
            }
            if (is_stop(stops)) {
                if (want) {
                    fail("incomplete expression before '" + t.text + "'");
                }
                break;
            }
            if (t.kind == TokenKind::op) {
                const std::string op = t.text;
                if (op == ")" || op == "]" || op == "}") {
                    fail("unbalanced '" + op + "'");
                }
                if (op == ";" || op == ":" || op == "@" || op == "..." || op == "->") {
                    fail("unexpected '" + op + "' in expression");
                }
                if (op == "?") {
                    binary();
                    ++ternary;
                    advance();
                    lvalue.reset();
                    continue;
                }
                if (op == "(") {
                    const std::size_t close = matching_close(pos_);
                    const Token& after = toks_[close + 1];
                    if (!arrow_is_stop && after.kind == TokenKind::op && after.text == "->") {
                        operand();
                        locals_.emplace_back();
                        for (std::size_t i = pos_ + 1; i < close; ++i) {
                            const Token& p = toks_[i];
                            const Token& n = toks_[i + 1];
                            if (p.kind == TokenKind::identifier && n.kind == TokenKind::op &&
                                (n.text == "," || n.text == ")")) {
                                declare_variable(p, "", "lambda-parameter");
                            }
                        }
                        pos_ = close + 2;
                        lambda_body(stops, consumer, context);
                        locals_.pop_back();
                        lvalue.reset();
                        continue;
                    }
                    if (!want) {
                        fail("missing operator before '('");
                    }
                    if (try_cast()) {
                        continue;
                    }
                    advance();
                    expression({")"}, consumer, context);
                    expect(")");
                    want = false;
                    lvalue.reset();
                    continue;
                }
                if (op == "[") {
                    binary();
                    advance();
                    expression({"]"}, consumer, context);
                    expect("]");
                    want = false;
                    lvalue.reset();
                    continue;
                }
                if (op == "{") {
                    operand();
                    array_initializer(consumer, context);
                    lvalue.reset();
                    continue;
                }
                if (kAssignOps.count(op)) {
                    binary();
                    const Token& op_tok = advance();
                    const bool has_target = lvalue && lvalue_end == pos_ - 1;
                    std::optional<Occurrence> target = has_target ? lvalue : std::nullopt;
                    if (target && !target->member) {
                        // The target occurrence was recorded as a read; for
                        // plain '=' it is a pure write.
                        auto it = std::find_if(reads.rbegin(), reads.rend(), [&](const Occurrence& o) {
                            return o.name == target->name && o.line == target->line;
                        });
                        if (it != reads.rend()) {
                            reads.erase(std::next(it).base());
                        }
                    }
                    flush_reads(reads, consumer, context);
                    const Token& at = target ? toks_[target_token_] : op_tok;
                    NodeId a = make_assignment(target ? &*target : nullptr, at, op, "");
                    if (target && op != "=") {
                        if (auto var = resolve(*target)) {
                            builder_.add_edge(a, *var, EdgeKind::uses, target->line, "update");
                        }
                    }
                    if (consumer) {
                        builder_.add_edge(a, *consumer, EdgeKind::flows_to);
                    }
                    const std::size_t rhs_begin = pos_;
                    expression_v(stops, a, "assignment");
                    builder_.node(a).value = source_text(rhs_begin, pos_ - 1);
                    set_end(a, last_line());
                    want = false;
                    lvalue.reset();
                    break;
                }
                if (op == "++" || op == "--") {
                    const Token& op_tok = advance();
                    if (want) {
                        prefix_incdec = op;
                    } else if (lvalue && lvalue_end == pos_ - 1) {
                        NodeId a = make_assignment(&*lvalue, toks_[target_token_], op, "");
                        if (auto var = resolve(*lvalue)) {
                            builder_.add_edge(a, *var, EdgeKind::uses, lvalue->line, "update");
                        }
                        set_end(a, op_tok.line);
                        if (!reads.empty() && reads.back().name == lvalue->name && reads.back().line == lvalue->line) {
                            reads.pop_back();
                        }
                        lvalue.reset();
                    }
                    continue;
                }
                if (op == "!" || op == "~") {
                    if (!want) {
                        fail("missing operator before '" + op + "'");
                    }
                    advance();
                    continue;
                }
                if ((op == "+" || op == "-") && want) {
                    advance();
                    continue;
                }
                binary();
                const Token& op_tok = advance();
                if (op == ">") {
                    // `>>` and `>>>` arrive as adjacent '>' tokens.
                    std::size_t end_offset = op_tok.offset + 1;
                    while (is_op(">") && peek().offset == end_offset) {
                        advance();
                        ++end_offset;
                    }
                }
                if (op != ".") {
                    lvalue.reset();
                }
                continue;
            }

            if (t.kind == TokenKind::keyword) {
                if (t.text == "new") {
                    operand();
                    creator(consumer, context);
                    lvalue.reset();
                    continue;
                }
                if (t.text == "switch") {
                    operand();
                    switch_construct(true);
                    continue;
                }
                if ((t.text == "this" || t.text == "super") && is_op("(", 1)) {
                    operand();
                    advance();
                    advance();
                    call_arguments(consumer);
                    continue;
                }
                if (t.text == "instanceof") {
                    binary();
                    advance();
                    skip_modifiers();
                    if (!try_type()) {
                        fail("expected a type after instanceof");
                    }
                    if (is_ident() && !is_stop(stops)) {
                        declare_variable(advance(), "", "pattern");
                    }
                    want = false;
                    continue;
                }
                if (t.text == "this" || t.text == "super" || t.text == "null" || t.text == "true" ||
                    t.text == "false" || t.text == "class" || kPrimitives.count(t.text)) {
                    operand();
                    advance();
                    lvalue.reset();
                    continue;
                }
                fail("unexpected keyword '" + t.text + "' in expression");
            }

            if (t.kind == TokenKind::identifier) {
                const std::size_t here = pos_;
                const bool after_dot = here > begin && toks_[here - 1].kind == TokenKind::op && toks_[here - 1].text == ".";
                const bool after_ref = here > begin && toks_[here - 1].kind == TokenKind::op && toks_[here - 1].text == "::";
                const bool this_dot = after_dot && here >= 2 && toks_[here - 2].kind == TokenKind::keyword &&
                                      toks_[here - 2].text == "this";
                operand();

                if (!arrow_is_stop && is_op("->", 1) && !after_dot) {
                    locals_.emplace_back();
                    declare_variable(advance(), "", "lambda-parameter");
                    advance();
                    lambda_body(stops, consumer, context);
                    locals_.pop_back();
                    lvalue.reset();
                    continue;
                }
                if (is_op("(", 1) && !after_ref) {
                    call(consumer);
                    lvalue.reset();
                    continue;
                }
                advance();
                if (after_ref) {
                    continue;
                }
                if (after_dot && !this_dot) {
                    // Member of another object: assignable but not resolvable.
                    lvalue = Occurrence{t.text, t.line, false, true};
                    target_token_ = here;
                    lvalue_end = pos_;
                    continue;
                }
                Occurrence occ{t.text, t.line, this_dot, false};
                reads.push_back(occ);
                lvalue = occ;
                target_token_ = here;
                lvalue_end = pos_;
                if (prefix_incdec) {
                    NodeId a = make_assignment(&occ, t, *prefix_incdec, "");
                    if (auto var = resolve(occ)) {
                        builder_.add_edge(a, *var, EdgeKind::uses, occ.line, "update");
                    }
                    reads.pop_back();
                    prefix_incdec.reset();
                }
                continue;
            }

            // literals
            operand();
            advance();
            lvalue.reset();
        }
        flush_reads(reads, consumer, context);
    }

    void call(std::optional<NodeId> consumer) {
        const Token& name = advance();
        NodeId c = add_node(NodeKind::call, name.text, name);
        contain(c);
        builder_.add_edge(owner_, c, EdgeKind::calls);
        if (consumer) {
            builder_.add_edge(c, *consumer, EdgeKind::flows_to);
        }
        expect("(");
        call_arguments(c);
        set_end(c, last_line());
    }

    void array_initializer(std::optional<NodeId> consumer, std::string_view context) {
        expect("{");
        while (!is_op("}")) {
            expression({",", "}"}, consumer, context);
            if (is_op(",")) {
                advance();
            }
        }
        advance();
    }

    void creator(std::optional<NodeId> consumer, std::string_view context) {
        advance();  // new
        skip_annotations();
        if (is_op("<")) {
            skip_angle();
        }
        if (!try_type()) {
            fail("expected type after 'new'");
        }
        if (is_op("[") || is_op("{")) {
            while (is_op("[")) {
                advance();
                if (!is_op("]")) {
                    expression({"]"}, consumer, context);
                }
                expect("]");
            }
            if (is_op("{")) {
                array_initializer(consumer, context);
            }
            return;
        }
        expect("(");
        call_arguments(consumer);
        if (is_op("{")) {
            anonymous_class_body(peek());
        }
    }

    const cpg::SourceUnit& unit_;
    std::vector<Token> toks_;
    GraphBuilder& builder_;
    NodeId file_node_;
    std::size_t pos_ = 0;

    NodeId owner_;
    std::vector<NodeId> containers_;
    std::vector<ClassScope> classes_;
    std::vector<std::map<std::string, NodeId>> locals_;
    std::size_t target_token_ = 0;
};

}  // namespace

bool JavaSubsetParser::accepts(const std::filesystem::path& file) const {
    return file.extension() == extension_;
}

void JavaSubsetParser::parse(const cpg::SourceUnit& unit, NodeId file_node, GraphBuilder& builder) const {
    Parser(unit, file_node, builder).compilation_unit();
}

void check_member_syntax(std::string_view member_text) {
    cpg::SourceUnit unit;
    unit.path = "<member>";
    unit.content = "class __ReinfixProbe {\n" + std::string(member_text) + "\n}\n";
    GraphBuilder builder;
    CpgNode file;
    file.kind = NodeKind::file;
    NodeId file_node = builder.add_node(std::move(file));
    try {
        Parser(unit, file_node, builder).single_member();
    } catch (const ParseError& e) {
        throw ParseError(std::max(1, e.line() - 1), e.what());
    }
}

}  // namespace reinfix::java
