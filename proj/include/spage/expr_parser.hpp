#pragma once

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "spage/expr.hpp"

namespace spage {

// Recursive descent parser for the condition / output mini-language.
//
//   pred   := conj ('OR' conj)*
//   conj   := cmp ('AND' cmp)*
//   cmp    := expr ('=' | '!=' | '<' | '<=' | '>' | '>=') expr
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := ['-'] number | string | ref | agg | '(' expr ')'
//   ref    := [ident '.'] ident
//   agg    := ('COUNT'|'SUM'|'AVG'|'MIN'|'MAX') '(' (expr | '*') ')'
//   sort   := 'ORDER' 'BY' key (',' key)* ['LIMIT' int]
//   key    := expr ['ASC' | 'DESC']
//   output := expr ['AS' ident]
//
// Keywords are case-insensitive. String literals accept "...", the Unicode
// typographic pair and the ``...'' ASCII convention; all normalize to plain
// text. Aggregate calls never nest and never appear inside predicates.

namespace detail {

enum class Tok { End, Ident, Int, Real, String, Symbol };

struct Token {
    Tok type = Tok::End;
    std::string text;     // ident name / symbol / string content
    std::int64_t int_val = 0;
    double real_val = 0;
    int line = 1;
    int col = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& input) : in_(input) { advance(); }

    const Token& peek() const { return tok_; }

    Token next() {
        Token t = tok_;
        advance();
        return t;
    }

    [[noreturn]] void fail(const std::string& expected) const {
        throw SyntaxError(tok_.line, tok_.col, expected,
                          "expected " + expected + " at line " + std::to_string(tok_.line) +
                              ", col " + std::to_string(tok_.col));
    }

private:
    void advance() {
        skip_ws();
        tok_ = Token{};
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= in_.size()) {
            tok_.type = Tok::End;
            tok_.text = "<end>";
            return;
        }
        char c = in_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            lex_ident();
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            lex_number();
        } else if (c == '"') {
            lex_string('"', "\"");
        } else if (starts_with("\xE2\x80\x9C")) {   // U+201C
            bump(3);
            lex_string_until("\xE2\x80\x9D");       // U+201D
        } else if (starts_with("``")) {
            bump(2);
            lex_string_until("''");
        } else {
            lex_symbol();
        }
    }

    void skip_ws() {
        while (pos_ < in_.size()) {
            char c = in_[pos_];
            if (c == '\n') {
                ++line_;
                col_ = 1;
                ++pos_;
            } else if (c == ' ' || c == '\t' || c == '\r') {
                bump(1);
            } else {
                break;
            }
        }
    }

    bool starts_with(const char* s) const { return in_.compare(pos_, std::strlen(s), s) == 0; }

    void bump(size_t n) {
        pos_ += n;
        col_ += int(n);
    }

    void lex_ident() {
        size_t start = pos_;
        while (pos_ < in_.size() &&
               (std::isalnum(static_cast<unsigned char>(in_[pos_])) || in_[pos_] == '_'))
            bump(1);
        tok_.type = Tok::Ident;
        tok_.text = in_.substr(start, pos_ - start);
    }

    void lex_number() {
        size_t start = pos_;
        bool real = false;
        while (pos_ < in_.size() && std::isdigit(static_cast<unsigned char>(in_[pos_]))) bump(1);
        if (pos_ + 1 < in_.size() && in_[pos_] == '.' &&
            std::isdigit(static_cast<unsigned char>(in_[pos_ + 1]))) {
            real = true;
            bump(1);
            while (pos_ < in_.size() && std::isdigit(static_cast<unsigned char>(in_[pos_]))) bump(1);
        }
        if (pos_ < in_.size() && (in_[pos_] == 'e' || in_[pos_] == 'E')) {
            size_t save = pos_;
            int save_col = col_;
            bump(1);
            if (pos_ < in_.size() && (in_[pos_] == '+' || in_[pos_] == '-')) bump(1);
            if (pos_ < in_.size() && std::isdigit(static_cast<unsigned char>(in_[pos_]))) {
                real = true;
                while (pos_ < in_.size() && std::isdigit(static_cast<unsigned char>(in_[pos_])))
                    bump(1);
            } else {
                pos_ = save;
                col_ = save_col;
            }
        }
        std::string text = in_.substr(start, pos_ - start);
        if (real) {
            tok_.type = Tok::Real;
            tok_.real_val = std::strtod(text.c_str(), nullptr);
        } else {
            errno = 0;
            tok_.int_val = std::strtoll(text.c_str(), nullptr, 10);
            if (errno == ERANGE)
                throw SyntaxError(tok_.line, tok_.col, "integer in range",
                                  "integer literal out of range: " + text);
            tok_.type = Tok::Int;
        }
    }

    void lex_string(char close, const char* /*what*/) {
        bump(1);
        std::string out;
        while (pos_ < in_.size()) {
            char c = in_[pos_];
            if (c == close) {
                bump(1);
                tok_.type = Tok::String;
                tok_.text = std::move(out);
                return;
            }
            if (c == '\\') {
                if (pos_ + 1 >= in_.size())
                    throw SyntaxError(line_, col_, "escape character", "dangling backslash");
                char e = in_[pos_ + 1];
                if (e != '"' && e != '\\')
                    throw SyntaxError(line_, col_, "\\\" or \\\\",
                                      std::string("invalid escape: \\") + e);
                out += e;
                bump(2);
            } else if (c == '\n') {
                throw SyntaxError(tok_.line, tok_.col, "closing quote",
                                  "unterminated string literal");
            } else {
                out += c;
                bump(1);
            }
        }
        throw SyntaxError(tok_.line, tok_.col, "closing quote", "unterminated string literal");
    }

    void lex_string_until(const char* close) {
        std::string out;
        size_t n = std::strlen(close);
        while (pos_ < in_.size()) {
            if (in_.compare(pos_, n, close) == 0) {
                bump(n);
                tok_.type = Tok::String;
                tok_.text = std::move(out);
                return;
            }
            if (in_[pos_] == '\n')
                throw SyntaxError(tok_.line, tok_.col, "closing quote",
                                  "unterminated string literal");
            out += in_[pos_];
            bump(1);
        }
        throw SyntaxError(tok_.line, tok_.col, "closing quote", "unterminated string literal");
    }

    void lex_symbol() {
        static const char* two[] = {"!=", "<=", ">=", "<>"};
        for (const char* s : two) {
            if (starts_with(s)) {
                tok_.type = Tok::Symbol;
                tok_.text = (std::string(s) == "<>") ? "!=" : s;
                bump(2);
                return;
            }
        }
        char c = in_[pos_];
        if (std::strchr("+-*/(),.=<>", c)) {
            tok_.type = Tok::Symbol;
            tok_.text = std::string(1, c);
            bump(1);
            return;
        }
        throw SyntaxError(line_, col_, "token",
                          "unexpected character '" + std::string(1, c) + "'");
    }

    const std::string& in_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token tok_;
};

class ExprParser {
public:
    explicit ExprParser(const std::string& text) : lex_(text) {}

    PredicatePtr predicate() {
        no_agg_ = true;
        auto p = parse_or();
        expect_end();
        return p;
    }

    OutputColumn output_column() {
        no_agg_ = false;
        OutputColumn out;
        out.expr = parse_expr();
        if (is_keyword("AS")) {
            lex_.next();
            out.alias = expect_ident("alias identifier");
        }
        expect_end();
        if (!out.expr->is_column_ref() && !out.alias)
            lex_.fail("'as <alias>' (computed output expressions require an alias)");
        return out;
    }

    SortSpec sort_spec() {
        no_agg_ = true;
        if (!is_keyword("ORDER")) lex_.fail("'ORDER BY'");
        lex_.next();
        if (!is_keyword("BY")) lex_.fail("'BY'");
        lex_.next();
        SortSpec spec;
        while (true) {
            SortKey key;
            key.expr = parse_expr();
            if (is_keyword("ASC")) {
                lex_.next();
            } else if (is_keyword("DESC")) {
                key.descending = true;
                lex_.next();
            }
            spec.keys.push_back(std::move(key));
            if (lex_.peek().type == Tok::Symbol && lex_.peek().text == ",") {
                lex_.next();
                continue;
            }
            break;
        }
        if (is_keyword("LIMIT")) {
            lex_.next();
            if (lex_.peek().type != Tok::Int) lex_.fail("integer limit");
            auto v = lex_.next().int_val;
            if (v < 1) lex_.fail("positive limit");
            spec.limit = v;
        }
        expect_end();
        return spec;
    }

private:
    PredicatePtr parse_or() {
        std::vector<PredicatePtr> items;
        items.push_back(parse_and());
        while (is_keyword("OR")) {
            lex_.next();
            items.push_back(parse_and());
        }
        if (items.size() == 1) return items[0];
        return Predicate::disj(std::move(items));
    }

    PredicatePtr parse_and() {
        std::vector<PredicatePtr> items;
        items.push_back(parse_cmp());
        while (is_keyword("AND")) {
            lex_.next();
            items.push_back(parse_cmp());
        }
        if (items.size() == 1) return items[0];
        return Predicate::conj(std::move(items));
    }

    PredicatePtr parse_cmp() {
        ExprPtr left = parse_expr();
        const Token& t = lex_.peek();
        CmpOp op;
        if (t.type != Tok::Symbol) lex_.fail("comparison operator");
        if (t.text == "=") op = CmpOp::Eq;
        else if (t.text == "!=") op = CmpOp::Ne;
        else if (t.text == "<") op = CmpOp::Lt;
        else if (t.text == "<=") op = CmpOp::Le;
        else if (t.text == ">") op = CmpOp::Gt;
        else if (t.text == ">=") op = CmpOp::Ge;
        else lex_.fail("comparison operator");
        lex_.next();
        ExprPtr right = parse_expr();
        return Predicate::compare(op, std::move(left), std::move(right));
    }

    ExprPtr parse_expr() {
        ExprPtr left = parse_term();
        while (lex_.peek().type == Tok::Symbol &&
               (lex_.peek().text == "+" || lex_.peek().text == "-")) {
            BinOp op = lex_.next().text == "+" ? BinOp::Add : BinOp::Sub;
            left = Expr::binary(op, std::move(left), parse_term());
        }
        return left;
    }

    ExprPtr parse_term() {
        ExprPtr left = parse_factor();
        while (lex_.peek().type == Tok::Symbol &&
               (lex_.peek().text == "*" || lex_.peek().text == "/")) {
            BinOp op = lex_.next().text == "*" ? BinOp::Mul : BinOp::Div;
            left = Expr::binary(op, std::move(left), parse_factor());
        }
        return left;
    }

    ExprPtr parse_factor() {
        const Token& t = lex_.peek();
        if (t.type == Tok::Symbol && t.text == "-") {
            lex_.next();
            const Token& n = lex_.peek();
            if (n.type == Tok::Int) return Expr::literal(Value::integer(-lex_.next().int_val));
            if (n.type == Tok::Real) return Expr::literal(Value::real(-lex_.next().real_val));
            lex_.fail("number after '-'");
        }
        if (t.type == Tok::Int) return Expr::literal(Value::integer(lex_.next().int_val));
        if (t.type == Tok::Real) return Expr::literal(Value::real(lex_.next().real_val));
        if (t.type == Tok::String) return Expr::literal(Value::text(lex_.next().text));
        if (t.type == Tok::Symbol && t.text == "(") {
            lex_.next();
            ExprPtr e = parse_expr();
            expect_symbol(")");
            return e;
        }
        if (t.type == Tok::Ident) {
            for (AggFn fn : {AggFn::Count, AggFn::Sum, AggFn::Avg, AggFn::Min, AggFn::Max}) {
                if (iequals(t.text, agg_fn_name(fn)) && peek_is_call()) return parse_agg(fn);
            }
            if (is_reserved(t.text)) lex_.fail("expression");
            std::string first = lex_.next().text;
            if (lex_.peek().type == Tok::Symbol && lex_.peek().text == ".") {
                lex_.next();
                std::string column = expect_ident("column name after '.'");
                return Expr::column(std::move(column), SourceRef::parse(first));
            }
            return Expr::column(std::move(first));
        }
        lex_.fail("expression");
    }

    ExprPtr parse_agg(AggFn fn) {
        if (no_agg_) lex_.fail("non-aggregate expression (aggregates are not allowed here)");
        if (in_agg_) lex_.fail("non-aggregate argument (aggregate calls cannot nest)");
        lex_.next();  // fn name
        expect_symbol("(");
        if (lex_.peek().type == Tok::Symbol && lex_.peek().text == "*") {
            lex_.next();
            expect_symbol(")");
            return Expr::agg(fn, nullptr);
        }
        in_agg_ = true;
        ExprPtr arg = parse_expr();
        in_agg_ = false;
        expect_symbol(")");
        return Expr::agg(fn, std::move(arg));
    }

    bool peek_is_call() {
        // look one raw character past the identifier is not possible with the
        // single-token lexer; clone a lexer positioned after the ident instead
        Lexer probe = lex_;
        probe.next();
        return probe.peek().type == Tok::Symbol && probe.peek().text == "(";
    }

    bool is_keyword(const char* kw) const {
        return lex_.peek().type == Tok::Ident && iequals(lex_.peek().text, kw);
    }

    static bool is_reserved(const std::string& s) {
        for (const char* kw : {"AND", "OR", "AS", "ORDER", "BY", "ASC", "DESC", "LIMIT"})
            if (iequals(s, kw)) return true;
        return false;
    }

    std::string expect_ident(const char* what) {
        if (lex_.peek().type != Tok::Ident || is_reserved(lex_.peek().text)) lex_.fail(what);
        return lex_.next().text;
    }

    void expect_symbol(const char* sym) {
        if (lex_.peek().type != Tok::Symbol || lex_.peek().text != sym)
            lex_.fail("'" + std::string(sym) + "'");
        lex_.next();
    }

    void expect_end() {
        if (lex_.peek().type != Tok::End) lex_.fail("end of input");
    }

    Lexer lex_;
    bool no_agg_ = false;
    bool in_agg_ = false;
};

}  // namespace detail

inline PredicatePtr parse_predicate(const std::string& text) {
    return detail::ExprParser(text).predicate();
}

inline OutputColumn parse_output_expr(const std::string& text) {
    return detail::ExprParser(text).output_column();
}

inline SortSpec parse_sort_spec(const std::string& text) {
    return detail::ExprParser(text).sort_spec();
}

}  // namespace spage
