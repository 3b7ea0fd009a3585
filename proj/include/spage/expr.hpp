#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spage/table.hpp"
#include "spage/value.hpp"

namespace spage {

// Reference to a step's input relation: either a catalog table by name or an
// earlier step's result ("Step<k>").
struct SourceRef {
    enum class Kind { InputTable, StepRef };

    Kind kind = Kind::InputTable;
    std::string table;
    int step_id = 0;

    static SourceRef input(std::string name) {
        SourceRef r;
        r.kind = Kind::InputTable;
        r.table = std::move(name);
        return r;
    }
    static SourceRef step(int id) {
        SourceRef r;
        r.kind = Kind::StepRef;
        r.step_id = id;
        return r;
    }

    // "Step<k>" (case-insensitive prefix) maps to a StepRef, anything else to
    // an input table name.
    static SourceRef parse(const std::string& token) {
        if (token.size() > 4 && iequals(token.substr(0, 4), "Step")) {
            bool digits = true;
            for (size_t i = 4; i < token.size(); ++i)
                if (!std::isdigit(static_cast<unsigned char>(token[i]))) digits = false;
            if (digits) return step(std::atoi(token.c_str() + 4));
        }
        return input(token);
    }

    std::string to_string() const {
        return kind == Kind::StepRef ? "Step" + std::to_string(step_id) : table;
    }

    friend bool operator==(const SourceRef& a, const SourceRef& b) {
        if (a.kind != b.kind) return false;
        if (a.kind == Kind::StepRef) return a.step_id == b.step_id;
        return iequals(a.table, b.table);
    }
};

enum class BinOp { Add, Sub, Mul, Div };
enum class AggFn { Count, Sum, Avg, Min, Max };
enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

inline const char* bin_op_text(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Div: return "/";
    }
    return "?";
}

inline const char* agg_fn_name(AggFn fn) {
    switch (fn) {
        case AggFn::Count: return "COUNT";
        case AggFn::Sum: return "SUM";
        case AggFn::Avg: return "AVG";
        case AggFn::Min: return "MIN";
        case AggFn::Max: return "MAX";
    }
    return "?";
}

inline const char* cmp_op_text(CmpOp op) {
    switch (op) {
        case CmpOp::Eq: return "=";
        case CmpOp::Ne: return "!=";
        case CmpOp::Lt: return "<";
        case CmpOp::Le: return "<=";
        case CmpOp::Gt: return ">";
        case CmpOp::Ge: return ">=";
    }
    return "?";
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    struct ColumnRef {
        std::optional<SourceRef> qualifier;
        std::string column;
    };
    struct Literal {
        Value value;
    };
    struct Binary {
        BinOp op;
        ExprPtr left;
        ExprPtr right;
    };
    struct AggCall {
        AggFn fn;
        ExprPtr arg;  // null means '*'
    };

    std::variant<ColumnRef, Literal, Binary, AggCall> node;

    static ExprPtr column(std::string name, std::optional<SourceRef> qual = std::nullopt) {
        return std::make_shared<Expr>(Expr{ColumnRef{std::move(qual), std::move(name)}});
    }
    static ExprPtr literal(Value v) { return std::make_shared<Expr>(Expr{Literal{std::move(v)}}); }
    static ExprPtr binary(BinOp op, ExprPtr l, ExprPtr r) {
        return std::make_shared<Expr>(Expr{Binary{op, std::move(l), std::move(r)}});
    }
    static ExprPtr agg(AggFn fn, ExprPtr arg) {
        return std::make_shared<Expr>(Expr{AggCall{fn, std::move(arg)}});
    }
    static ExprPtr count_star() { return agg(AggFn::Count, nullptr); }

    bool is_column_ref() const { return std::holds_alternative<ColumnRef>(node); }
    bool is_literal() const { return std::holds_alternative<Literal>(node); }
    bool is_binary() const { return std::holds_alternative<Binary>(node); }
    bool is_agg() const { return std::holds_alternative<AggCall>(node); }

    const ColumnRef& as_column_ref() const { return std::get<ColumnRef>(node); }
    const Literal& as_literal() const { return std::get<Literal>(node); }
    const Binary& as_binary() const { return std::get<Binary>(node); }
    const AggCall& as_agg() const { return std::get<AggCall>(node); }
};

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    if (a->node.index() != b->node.index()) return false;
    if (a->is_column_ref()) {
        const auto& x = a->as_column_ref();
        const auto& y = b->as_column_ref();
        return x.qualifier == y.qualifier && iequals(x.column, y.column);
    }
    if (a->is_literal()) return a->as_literal().value == b->as_literal().value;
    if (a->is_binary()) {
        const auto& x = a->as_binary();
        const auto& y = b->as_binary();
        return x.op == y.op && expr_equal(x.left, y.left) && expr_equal(x.right, y.right);
    }
    const auto& x = a->as_agg();
    const auto& y = b->as_agg();
    return x.fn == y.fn && expr_equal(x.arg, y.arg);
}

inline bool expr_contains_agg(const ExprPtr& e) {
    if (!e) return false;
    if (e->is_agg()) return true;
    if (e->is_binary())
        return expr_contains_agg(e->as_binary().left) || expr_contains_agg(e->as_binary().right);
    return false;
}

struct Predicate;
using PredicatePtr = std::shared_ptr<const Predicate>;

struct Predicate {
    struct Compare {
        CmpOp op;
        ExprPtr left;
        ExprPtr right;
    };
    struct And {
        std::vector<PredicatePtr> items;
    };
    struct Or {
        std::vector<PredicatePtr> items;
    };
    struct True {};

    std::variant<Compare, And, Or, True> node;

    static PredicatePtr compare(CmpOp op, ExprPtr l, ExprPtr r) {
        return std::make_shared<Predicate>(Predicate{Compare{op, std::move(l), std::move(r)}});
    }
    static PredicatePtr conj(std::vector<PredicatePtr> items) {
        return std::make_shared<Predicate>(Predicate{And{std::move(items)}});
    }
    static PredicatePtr disj(std::vector<PredicatePtr> items) {
        return std::make_shared<Predicate>(Predicate{Or{std::move(items)}});
    }
    static PredicatePtr always_true() { return std::make_shared<Predicate>(Predicate{True{}}); }

    bool is_compare() const { return std::holds_alternative<Compare>(node); }
    bool is_and() const { return std::holds_alternative<And>(node); }
    bool is_or() const { return std::holds_alternative<Or>(node); }
    bool is_true() const { return std::holds_alternative<True>(node); }

    const Compare& as_compare() const { return std::get<Compare>(node); }
    const And& as_and() const { return std::get<And>(node); }
    const Or& as_or() const { return std::get<Or>(node); }
};

inline bool predicate_equal(const PredicatePtr& a, const PredicatePtr& b) {
    if (!a || !b) return !a && !b;
    if (a->node.index() != b->node.index()) return false;
    if (a->is_true()) return true;
    if (a->is_compare()) {
        const auto& x = a->as_compare();
        const auto& y = b->as_compare();
        return x.op == y.op && expr_equal(x.left, y.left) && expr_equal(x.right, y.right);
    }
    const auto& xs = a->is_and() ? a->as_and().items : a->as_or().items;
    const auto& ys = b->is_and() ? b->as_and().items : b->as_or().items;
    if (xs.size() != ys.size()) return false;
    for (size_t i = 0; i < xs.size(); ++i)
        if (!predicate_equal(xs[i], ys[i])) return false;
    return true;
}

struct SortKey {
    ExprPtr expr;
    bool descending = false;

    friend bool operator==(const SortKey& a, const SortKey& b) {
        return a.descending == b.descending && expr_equal(a.expr, b.expr);
    }
};

struct SortSpec {
    std::vector<SortKey> keys;
    std::optional<std::int64_t> limit;

    friend bool operator==(const SortSpec&, const SortSpec&) = default;
};

struct OutputColumn {
    ExprPtr expr;
    std::optional<std::string> alias;

    bool is_bare_ref() const { return expr && expr->is_column_ref(); }

    // alias, or the referenced column's name as written
    std::string name() const {
        if (alias) return *alias;
        return expr->as_column_ref().column;
    }

    friend bool operator==(const OutputColumn& a, const OutputColumn& b) {
        if (a.alias.has_value() != b.alias.has_value()) return false;
        if (a.alias && !iequals(*a.alias, *b.alias)) return false;
        return expr_equal(a.expr, b.expr);
    }
};

// ---------------------------------------------------------------------------
// Canonical text rendering. parse(print(x)) reproduces x structurally.
// ---------------------------------------------------------------------------

namespace detail {

inline int bin_op_prec(BinOp op) {
    return (op == BinOp::Add || op == BinOp::Sub) ? 1 : 2;
}

inline std::string quote_text_literal(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += "\"";
    return out;
}

inline std::string literal_to_text(const Value& v) {
    if (v.is_integer()) return std::to_string(v.as_integer());
    if (v.is_real()) return format_real(v.as_real());
    if (v.is_date()) return quote_text_literal(v.as_date().to_string());
    if (v.is_text()) return quote_text_literal(v.as_text());
    throw StructureError("null literal has no text form");
}

inline std::string expr_text(const ExprPtr& e, int parent_prec, bool right_side) {
    if (!e) throw StructureError("null expression");
    if (e->is_column_ref()) {
        const auto& r = e->as_column_ref();
        return r.qualifier ? r.qualifier->to_string() + "." + r.column : r.column;
    }
    if (e->is_literal()) return literal_to_text(e->as_literal().value);
    if (e->is_agg()) {
        const auto& a = e->as_agg();
        return std::string(agg_fn_name(a.fn)) + "(" + (a.arg ? expr_text(a.arg, 0, false) : "*") +
               ")";
    }
    const auto& b = e->as_binary();
    int prec = bin_op_prec(b.op);
    std::string out = expr_text(b.left, prec, false);
    out += " ";
    out += bin_op_text(b.op);
    out += " ";
    out += expr_text(b.right, prec, true);
    bool need_parens = prec < parent_prec || (prec == parent_prec && right_side);
    return need_parens ? "(" + out + ")" : out;
}

}  // namespace detail

inline std::string expr_to_string(const ExprPtr& e) { return detail::expr_text(e, 0, false); }

inline std::string predicate_to_string(const PredicatePtr& p) {
    if (!p) throw StructureError("null predicate");
    if (p->is_true()) throw StructureError("True predicate has no text form; omit the condition");
    if (p->is_compare()) {
        const auto& c = p->as_compare();
        return expr_to_string(c.left) + " " + cmp_op_text(c.op) + " " + expr_to_string(c.right);
    }
    if (p->is_and()) {
        std::string out;
        for (size_t i = 0; i < p->as_and().items.size(); ++i) {
            if (i) out += " AND ";
            out += predicate_to_string(p->as_and().items[i]);
        }
        return out;
    }
    std::string out;
    for (size_t i = 0; i < p->as_or().items.size(); ++i) {
        if (i) out += " OR ";
        out += predicate_to_string(p->as_or().items[i]);
    }
    return out;
}

inline std::string sort_spec_to_string(const SortSpec& s) {
    std::string out = "ORDER BY ";
    for (size_t i = 0; i < s.keys.size(); ++i) {
        if (i) out += ", ";
        out += expr_to_string(s.keys[i].expr);
        if (s.keys[i].descending) out += " DESC";
    }
    if (s.limit) out += " LIMIT " + std::to_string(*s.limit);
    return out;
}

inline std::string output_column_to_string(const OutputColumn& o) {
    std::string out = expr_to_string(o.expr);
    if (o.alias) out += " as " + *o.alias;
    return out;
}

}  // namespace spage
