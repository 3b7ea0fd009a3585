#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spage/plan.hpp"
#include "spage/table.hpp"

namespace spage {

// Diagnostic codes shared by the validator and the binder.
enum class DiagCode {
    UnknownSource,
    UnknownColumn,
    AmbiguousColumn,
    TypeMismatch,
    SetOpSchemaMismatch,
    NonEquiJoinUnsupported,
    MissingAlias,
    DuplicateOutputColumn,
    NonGroupedColumn,
    UnusedStep,
    ImplicitGlobalAggregate,
};

inline const char* diag_code_name(DiagCode c) {
    switch (c) {
        case DiagCode::UnknownSource: return "UnknownSource";
        case DiagCode::UnknownColumn: return "UnknownColumn";
        case DiagCode::AmbiguousColumn: return "AmbiguousColumn";
        case DiagCode::TypeMismatch: return "TypeMismatch";
        case DiagCode::SetOpSchemaMismatch: return "SetOpSchemaMismatch";
        case DiagCode::NonEquiJoinUnsupported: return "NonEquiJoinUnsupported";
        case DiagCode::MissingAlias: return "MissingAlias";
        case DiagCode::DuplicateOutputColumn: return "DuplicateOutputColumn";
        case DiagCode::NonGroupedColumn: return "NonGroupedColumn";
        case DiagCode::UnusedStep: return "UnusedStep";
        case DiagCode::ImplicitGlobalAggregate: return "ImplicitGlobalAggregate";
    }
    return "?";
}

class BindError : public Error {
public:
    BindError(DiagCode code, const std::string& m) : Error(diag_code_name(code), m), code_(code) {}
    DiagCode code() const { return code_; }

private:
    DiagCode code_;
};

// Resolution scope of one step: its sources in order, with their schemas.
class StepContext {
public:
    StepContext() = default;

    void add_source(SourceRef ref, const Schema& schema) {
        sources_.emplace_back(std::move(ref), schema);
    }

    size_t source_count() const { return sources_.size(); }
    const SourceRef& source_ref(size_t i) const { return sources_[i].first; }
    const Schema& source_schema(size_t i) const { return sources_[i].second; }

    struct Resolved {
        size_t source = 0;
        size_t column = 0;
        ColumnType type = ColumnType::Text;
    };

    Resolved resolve(const Expr::ColumnRef& ref) const {
        if (ref.qualifier) {
            std::optional<size_t> src;
            for (size_t i = 0; i < sources_.size(); ++i) {
                if (sources_[i].first == *ref.qualifier) {
                    if (src)
                        throw BindError(DiagCode::AmbiguousColumn,
                                        "qualifier '" + ref.qualifier->to_string() +
                                            "' matches more than one source");
                    src = i;
                }
            }
            if (!src)
                throw BindError(DiagCode::UnknownSource,
                                "qualifier '" + ref.qualifier->to_string() +
                                    "' is not a source of this step");
            auto col = sources_[*src].second.index_of(ref.column);
            if (!col)
                throw BindError(DiagCode::UnknownColumn,
                                "no column '" + ref.column + "' in source '" +
                                    ref.qualifier->to_string() + "'");
            return {*src, *col, sources_[*src].second.at(*col).type};
        }
        std::optional<Resolved> hit;
        for (size_t i = 0; i < sources_.size(); ++i) {
            if (auto col = sources_[i].second.index_of(ref.column)) {
                if (hit)
                    throw BindError(DiagCode::AmbiguousColumn,
                                    "column '" + ref.column + "' is ambiguous across sources");
                hit = Resolved{i, *col, sources_[i].second.at(*col).type};
            }
        }
        if (!hit)
            throw BindError(DiagCode::UnknownColumn,
                            "no column '" + ref.column + "' in any source");
        return *hit;
    }

private:
    std::vector<std::pair<SourceRef, Schema>> sources_;
};

namespace detail {

inline bool is_numeric_type(ColumnType t) {
    return t == ColumnType::Integer || t == ColumnType::Real;
}

// ISO-8601-shaped Text literal, comparable against Date expressions.
inline bool is_date_shaped_literal(const ExprPtr& e) {
    if (!e || !e->is_literal()) return false;
    const Value& v = e->as_literal().value;
    return v.is_text() && Date::parse(v.as_text()).has_value();
}

}  // namespace detail

// Static type of an expression. `allow_agg` admits AggCall nodes (Aggregate
// outputs only).
inline ColumnType infer_expr_type(const ExprPtr& e, const StepContext& ctx, bool allow_agg) {
    if (!e) throw BindError(DiagCode::TypeMismatch, "null expression");
    if (e->is_column_ref()) return ctx.resolve(e->as_column_ref()).type;
    if (e->is_literal()) {
        auto t = e->as_literal().value.type();
        if (!t) throw BindError(DiagCode::TypeMismatch, "null literal has no type");
        return *t;
    }
    if (e->is_agg()) {
        const auto& a = e->as_agg();
        if (!allow_agg)
            throw BindError(DiagCode::TypeMismatch, "aggregate call is not allowed here");
        if (!a.arg) {
            if (a.fn != AggFn::Count)
                throw BindError(DiagCode::TypeMismatch,
                                std::string(agg_fn_name(a.fn)) + "(*) is not defined; only "
                                                                 "COUNT(*) takes '*'");
            return ColumnType::Integer;
        }
        ColumnType arg = infer_expr_type(a.arg, ctx, false);
        switch (a.fn) {
            case AggFn::Count: return ColumnType::Integer;
            case AggFn::Sum:
                if (!detail::is_numeric_type(arg))
                    throw BindError(DiagCode::TypeMismatch,
                                    "SUM requires a numeric argument, got " +
                                        std::string(column_type_name(arg)));
                return arg;
            case AggFn::Avg:
                if (!detail::is_numeric_type(arg))
                    throw BindError(DiagCode::TypeMismatch,
                                    "AVG requires a numeric argument, got " +
                                        std::string(column_type_name(arg)));
                return ColumnType::Real;
            case AggFn::Min:
            case AggFn::Max: return arg;
        }
        throw BindError(DiagCode::TypeMismatch, "unknown aggregate");
    }
    const auto& b = e->as_binary();
    ColumnType lt = infer_expr_type(b.left, ctx, allow_agg);
    ColumnType rt = infer_expr_type(b.right, ctx, allow_agg);
    if (b.op == BinOp::Sub && lt == ColumnType::Date && rt == ColumnType::Date)
        return ColumnType::Integer;  // day count
    if (detail::is_numeric_type(lt) && detail::is_numeric_type(rt)) {
        if (b.op == BinOp::Div) return ColumnType::Real;
        return (lt == ColumnType::Integer && rt == ColumnType::Integer) ? ColumnType::Integer
                                                                        : ColumnType::Real;
    }
    throw BindError(DiagCode::TypeMismatch,
                    std::string(column_type_name(lt)) + " " + bin_op_text(b.op) + " " +
                        column_type_name(rt) + " is not defined");
}

// Comparison typing: numeric against numeric, like against like, or a Date
// expression against an ISO-shaped Text literal.
inline void check_compare_types(const Predicate::Compare& cmp, const StepContext& ctx) {
    ColumnType lt = infer_expr_type(cmp.left, ctx, false);
    ColumnType rt = infer_expr_type(cmp.right, ctx, false);
    if (lt == rt) return;
    if (detail::is_numeric_type(lt) && detail::is_numeric_type(rt)) return;
    if (lt == ColumnType::Date && rt == ColumnType::Text &&
        detail::is_date_shaped_literal(cmp.right))
        return;
    if (rt == ColumnType::Date && lt == ColumnType::Text &&
        detail::is_date_shaped_literal(cmp.left))
        return;
    throw BindError(DiagCode::TypeMismatch,
                    "cannot compare " + std::string(column_type_name(lt)) + " with " +
                        column_type_name(rt));
}

inline void check_predicate_types(const PredicatePtr& p, const StepContext& ctx) {
    if (!p || p->is_true()) return;
    if (p->is_compare()) {
        check_compare_types(p->as_compare(), ctx);
        return;
    }
    const auto& items = p->is_and() ? p->as_and().items : p->as_or().items;
    for (const auto& item : items) check_predicate_types(item, ctx);
}

// Conjunction of plain equality comparisons (hashable join shape).
inline bool is_equi_join_predicate(const PredicatePtr& p) {
    if (!p || p->is_true()) return false;
    if (p->is_compare()) return p->as_compare().op == CmpOp::Eq;
    if (p->is_and()) {
        for (const auto& item : p->as_and().items)
            if (!item->is_compare() || item->as_compare().op != CmpOp::Eq) return false;
        return true;
    }
    return false;
}

// Output schema of a non-set-operation step. Duplicate output names are
// rejected; computed expressions must carry an alias.
inline Schema infer_output_schema(const Step& step, const StepContext& ctx) {
    bool is_agg_step = step.operation == Operation::Aggregate;
    std::vector<Column> cols;
    for (const auto& out : step.output) {
        if (!out.is_bare_ref() && !out.alias)
            throw BindError(DiagCode::MissingAlias,
                            "output '" + expr_to_string(out.expr) + "' requires an alias");
        ColumnType t = infer_expr_type(out.expr, ctx, is_agg_step);
        cols.push_back({out.name(), t});
    }
    for (size_t i = 0; i < cols.size(); ++i)
        for (size_t j = i + 1; j < cols.size(); ++j)
            if (iequals(cols[i].name, cols[j].name))
                throw BindError(DiagCode::DuplicateOutputColumn,
                                "duplicate output column name '" + cols[j].name + "'");
    try {
        return Schema(std::move(cols));
    } catch (const Error& e) {
        throw BindError(DiagCode::DuplicateOutputColumn, e.what());
    }
}

// Group keys of an Aggregate step are its non-aggregate outputs, in order.
struct AggregateShape {
    std::vector<size_t> key_outputs;
    std::vector<size_t> agg_outputs;
    bool global() const { return key_outputs.empty(); }
};

inline AggregateShape aggregate_shape(const Step& step) {
    AggregateShape shape;
    for (size_t i = 0; i < step.output.size(); ++i) {
        if (expr_contains_agg(step.output[i].expr)) shape.agg_outputs.push_back(i);
        else shape.key_outputs.push_back(i);
    }
    return shape;
}

// Inside aggregate outputs, a column reference outside any AggCall must also
// appear as a bare grouping key.
inline void check_aggregate_grouping(const Step& step, const StepContext& ctx) {
    auto shape = aggregate_shape(step);
    std::vector<StepContext::Resolved> keys;
    for (size_t i : shape.key_outputs) {
        const auto& out = step.output[i];
        if (out.is_bare_ref()) keys.push_back(ctx.resolve(out.expr->as_column_ref()));
    }
    for (size_t i : shape.agg_outputs) {
        for_each_column_ref(step.output[i].expr, [&](const Expr::ColumnRef& ref, bool in_agg) {
            if (in_agg) return;
            auto r = ctx.resolve(ref);
            for (const auto& k : keys)
                if (k.source == r.source && k.column == r.column) return;
            throw BindError(DiagCode::NonGroupedColumn,
                            "column '" + ref.column +
                                "' appears outside an aggregate but is not a grouping key");
        });
    }
}

}  // namespace spage
