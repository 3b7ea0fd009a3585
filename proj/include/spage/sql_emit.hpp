#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spage/binder.hpp"
#include "spage/plan.hpp"
#include "spage/validator.hpp"

namespace spage {

// `Ansi` sticks to the minimal portable subset. `SqliteCompat` adds the two
// shims SQLite needs to match the native engine: real division for '/' and a
// julianday difference for Date - Date.
enum class SqlDialect { Ansi, SqliteCompat };

inline std::optional<SqlDialect> sql_dialect_from_name(const std::string& s) {
    if (s == "ansi") return SqlDialect::Ansi;
    if (s == "sqlite-compatible" || s == "sqlite") return SqlDialect::SqliteCompat;
    return std::nullopt;
}

struct EmitOptions {
    SqlDialect dialect = SqlDialect::Ansi;
    // Per-step execution harnesses materialize step inputs as real tables;
    // ordering ties in TopSort then break on rowid so LIMIT picks the same
    // rows the stable native sort keeps. Not valid in CTE mode.
    bool topsort_rowid_tiebreak = false;
};

struct EmittedSql {
    int step_id = 0;
    std::string sql;
    std::vector<SourceRef> references;
};

namespace detail {

inline std::string sql_quote_ident(const std::string& name) {
    std::string out = "\"";
    for (char c : name) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

inline std::string sql_quote_text(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "''";
        else out += c;
    }
    out += "'";
    return out;
}

inline std::string sql_relation(const SourceRef& src) {
    return src.kind == SourceRef::Kind::StepRef ? "step_" + std::to_string(src.step_id)
                                                : sql_quote_ident(src.table);
}

class SqlEmitter {
public:
    SqlEmitter(const Step& step, const StepContext* ctx, const EmitOptions& options)
        : step_(step), ctx_(ctx), options_(options) {
        qualify_ = step_.operation == Operation::Join;
    }

    std::string select_sql() {
        switch (step_.operation) {
            case Operation::Scan:
            case Operation::Filter: {
                std::string sql = "SELECT " + output_list() + " FROM " + relation(0);
                if (has_predicate()) sql += " WHERE " + predicate_sql(step_.predicate, 0);
                return sql;
            }
            case Operation::Aggregate: {
                std::string sql = "SELECT " + output_list() + " FROM " + relation(0);
                if (has_predicate()) sql += " WHERE " + predicate_sql(step_.predicate, 0);
                std::string keys;
                for (const auto& out : step_.output) {
                    if (expr_contains_agg(out.expr)) continue;
                    if (!keys.empty()) keys += ", ";
                    keys += expr_sql(out.expr, 0, false);
                }
                if (!keys.empty()) sql += " GROUP BY " + keys;
                return sql;
            }
            case Operation::Sort:
            case Operation::TopSort: {
                std::string sql = "SELECT " + output_list() + " FROM " + relation(0);
                sql += " ORDER BY " + sort_keys_sql();
                if (step_.operation == Operation::TopSort) {
                    if (options_.topsort_rowid_tiebreak) sql += ", rowid";
                    sql += " LIMIT " + std::to_string(*step_.sort->limit);
                }
                return sql;
            }
            case Operation::Join: {
                std::string sql = "SELECT " + output_list() + " FROM " + relation(0) +
                                  " AS s1 JOIN " + relation(1) + " AS s2 ON " +
                                  (has_predicate() ? predicate_sql(step_.predicate, 0) : "1 = 1");
                return sql;
            }
            case Operation::Except:
            case Operation::Intersect:
            case Operation::Union: {
                const char* op = step_.operation == Operation::Except ? "EXCEPT"
                                 : step_.operation == Operation::Intersect ? "INTERSECT"
                                                                           : "UNION";
                return "SELECT * FROM " + relation(0) + " " + op + " SELECT * FROM " + relation(1);
            }
        }
        throw UnsupportedExpr("unknown operation");
    }

private:
    bool has_predicate() const { return step_.predicate && !step_.predicate->is_true(); }

    std::string relation(size_t i) const { return sql_relation(step_.source[i]); }

    std::string output_list() {
        std::string out;
        for (size_t i = 0; i < step_.output.size(); ++i) {
            if (i) out += ", ";
            const auto& col = step_.output[i];
            out += expr_sql(col.expr, 0, false);
            if (col.alias) out += " AS " + sql_quote_ident(*col.alias);
        }
        return out;
    }

    std::string sort_keys_sql() {
        std::string out;
        for (size_t i = 0; i < step_.sort->keys.size(); ++i) {
            if (i) out += ", ";
            const auto& key = step_.sort->keys[i];
            out += expr_sql(key.expr, 0, false);
            if (key.descending) out += " DESC";
            out += " NULLS LAST";
        }
        return out;
    }

    std::string column_ref_sql(const Expr::ColumnRef& ref) const {
        std::string col = sql_quote_ident(ref.column);
        if (!qualify_) return col;
        // join sources are aliased s1/s2; rewrite qualifiers accordingly
        size_t src = 0;
        if (ref.qualifier) {
            bool found = false;
            for (size_t i = 0; i < step_.source.size(); ++i) {
                if (step_.source[i] == *ref.qualifier) {
                    src = i;
                    found = true;
                    break;
                }
            }
            if (!found)
                throw UnsupportedExpr("qualifier '" + ref.qualifier->to_string() +
                                      "' is not a source of step " + std::to_string(step_.id));
        } else if (ctx_) {
            src = ctx_->resolve(ref).source;
        } else {
            throw UnsupportedExpr(
                "unqualified column '" + ref.column +
                "' in a join requires schema context; pass a catalog to the emitter");
        }
        return (src == 0 ? "s1." : "s2.") + col;
    }

    std::optional<ColumnType> static_type(const ExprPtr& e) const {
        if (!ctx_) return std::nullopt;
        try {
            return infer_expr_type(e, *ctx_, true);
        } catch (const BindError&) {
            return std::nullopt;
        }
    }

    std::string expr_sql(const ExprPtr& e, int parent_prec, bool right_side) {
        if (!e) throw UnsupportedExpr("null expression");
        if (e->is_column_ref()) return column_ref_sql(e->as_column_ref());
        if (e->is_literal()) {
            const Value& v = e->as_literal().value;
            if (v.is_integer()) return std::to_string(v.as_integer());
            if (v.is_real()) return format_real(v.as_real());
            if (v.is_date()) return sql_quote_text(v.as_date().to_string());
            if (v.is_text()) return sql_quote_text(v.as_text());
            throw UnsupportedExpr("null literal");
        }
        if (e->is_agg()) {
            const auto& a = e->as_agg();
            return std::string(agg_fn_name(a.fn)) + "(" +
                   (a.arg ? expr_sql(a.arg, 0, false) : "*") + ")";
        }
        const auto& b = e->as_binary();
        if (b.op == BinOp::Sub && options_.dialect == SqlDialect::SqliteCompat) {
            auto lt = static_type(b.left);
            auto rt = static_type(b.right);
            if (lt == ColumnType::Date && rt == ColumnType::Date) {
                return "CAST(julianday(" + expr_sql(b.left, 0, false) + ") - julianday(" +
                       expr_sql(b.right, 0, false) + ") AS INTEGER)";
            }
        }
        if (b.op == BinOp::Div && options_.dialect == SqlDialect::SqliteCompat) {
            // force real division; SQLite truncates integer '/'
            return maybe_parens("CAST(" + expr_sql(b.left, 0, false) + " AS REAL) / " +
                                    expr_sql(b.right, 2, true),
                                2, parent_prec, right_side);
        }
        int prec = (b.op == BinOp::Add || b.op == BinOp::Sub) ? 1 : 2;
        std::string sql = expr_sql(b.left, prec, false);
        sql += " ";
        sql += bin_op_text(b.op);
        sql += " ";
        sql += expr_sql(b.right, prec, true);
        return maybe_parens(std::move(sql), prec, parent_prec, right_side);
    }

    static std::string maybe_parens(std::string sql, int prec, int parent_prec, bool right_side) {
        bool need = prec < parent_prec || (prec == parent_prec && right_side);
        return need ? "(" + std::move(sql) + ")" : std::move(sql);
    }

    std::string predicate_sql(const PredicatePtr& p, int parent_level) {
        // levels: 0 = OR, 1 = AND, 2 = comparison
        if (!p) throw UnsupportedExpr("null predicate");
        if (p->is_true()) return "1 = 1";
        if (p->is_compare()) {
            const auto& c = p->as_compare();
            return expr_sql(c.left, 0, false) + " " + cmp_op_text(c.op) + " " +
                   expr_sql(c.right, 0, false);
        }
        bool is_and = p->is_and();
        const auto& items = is_and ? p->as_and().items : p->as_or().items;
        std::string sql;
        for (size_t i = 0; i < items.size(); ++i) {
            if (i) sql += is_and ? " AND " : " OR ";
            sql += predicate_sql(items[i], is_and ? 1 : 0);
        }
        int level = is_and ? 1 : 0;
        if (level < parent_level) sql = "(" + sql + ")";
        return sql;
    }

    const Step& step_;
    const StepContext* ctx_;
    EmitOptions options_;
    bool qualify_ = false;
};

inline StepContext make_step_context(const Step& step, const std::vector<Schema>& source_schemas) {
    if (source_schemas.size() != step.source.size())
        throw StructureError("one schema per source required");
    StepContext ctx;
    for (size_t i = 0; i < step.source.size(); ++i) ctx.add_source(step.source[i], source_schemas[i]);
    return ctx;
}

}  // namespace detail

// Deterministic SQL for one step. Source schemas drive the dialect shims
// (Date - Date) and unqualified join resolution; pass an empty optional to
// emit without type information.
inline EmittedSql emit_step_sql(const Step& step,
                                const std::optional<std::vector<Schema>>& source_schemas,
                                const EmitOptions& options = {}) {
    EmittedSql out;
    out.step_id = step.id;
    out.references = step.source;
    if (source_schemas) {
        StepContext ctx = detail::make_step_context(step, *source_schemas);
        out.sql = detail::SqlEmitter(step, &ctx, options).select_sql();
    } else {
        out.sql = detail::SqlEmitter(step, nullptr, options).select_sql();
    }
    return out;
}

// Whole plan as one CTE chain:
//   WITH step_1 AS (...), step_2 AS (...) SELECT * FROM step_<terminal>
// The catalog provides schemas; the plan must validate cleanly.
inline std::string emit_plan_sql(const Plan& plan, const Catalog& catalog,
                                 const EmitOptions& options = {}) {
    plan.validate_structure();
    ValidationReport report = validate_plan(plan, catalog);
    if (!report.ok()) {
        auto errs = report.errors();
        throw StructureError("plan does not validate against the catalog: " + errs[0].message);
    }
    EmitOptions step_options = options;
    step_options.topsort_rowid_tiebreak = false;  // CTEs have no rowid
    std::string sql = "WITH ";
    for (size_t i = 0; i < plan.steps.size(); ++i) {
        const Step& step = plan.steps[i];
        std::vector<Schema> schemas;
        for (const auto& src : step.source) {
            if (src.kind == SourceRef::Kind::InputTable)
                schemas.push_back(catalog.find(src.table)->schema());
            else schemas.push_back(report.inferred_schemas.at(src.step_id));
        }
        if (i) sql += ", ";
        sql += "step_" + std::to_string(step.id) + " AS (" +
               emit_step_sql(step, schemas, step_options).sql + ")";
    }
    sql += " SELECT * FROM step_" + std::to_string(plan.terminal_id());
    return sql;
}

}  // namespace spage
