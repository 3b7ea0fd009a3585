#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <sqlite3.h>

#include "spage/engine.hpp"
#include "spage/sql_emit.hpp"
#include "spage/table.hpp"

namespace spage {

struct SqlResult {
    std::vector<std::string> columns;
    std::vector<Row> rows;
};

// Minimal RAII wrapper around an in-memory SQLite database.
class SqliteDb {
public:
    SqliteDb() {
        if (sqlite3_open(":memory:", &db_) != SQLITE_OK)
            throw BackendError("cannot open in-memory sqlite database");
    }
    ~SqliteDb() {
        if (db_) sqlite3_close(db_);
    }
    SqliteDb(const SqliteDb&) = delete;
    SqliteDb& operator=(const SqliteDb&) = delete;

    void exec(const std::string& sql) {
        char* err = nullptr;
        if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
            std::string msg = err ? err : "sqlite error";
            sqlite3_free(err);
            throw BackendError(msg + " while executing: " + sql);
        }
    }

    // CREATE TABLE + INSERT the rows in order; rowid order matches row order.
    void materialize(const Table& table, const std::string& rel_name) {
        std::string create = "CREATE TABLE " + quote_rel(rel_name) + " (";
        for (size_t i = 0; i < table.schema().width(); ++i) {
            if (i) create += ", ";
            create += detail::sql_quote_ident(table.schema().at(i).name);
            create += " ";
            create += sql_decl(table.schema().at(i).type);
        }
        create += ")";
        exec(create);
        std::string insert = "INSERT INTO " + quote_rel(rel_name) + " VALUES (";
        for (size_t i = 0; i < table.schema().width(); ++i) {
            if (i) insert += ", ";
            insert += "?";
        }
        insert += ")";
        sqlite3_stmt* stmt = nullptr;
        if (sqlite3_prepare_v2(db_, insert.c_str(), -1, &stmt, nullptr) != SQLITE_OK)
            throw BackendError(std::string(sqlite3_errmsg(db_)) + " preparing: " + insert);
        for (const Row& row : table.rows()) {
            for (size_t c = 0; c < row.size(); ++c) bind_value(stmt, int(c) + 1, row[c]);
            if (sqlite3_step(stmt) != SQLITE_DONE) {
                std::string msg = sqlite3_errmsg(db_);
                sqlite3_finalize(stmt);
                throw BackendError("insert failed: " + msg);
            }
            sqlite3_reset(stmt);
            sqlite3_clear_bindings(stmt);
        }
        sqlite3_finalize(stmt);
    }

    SqlResult query(const std::string& sql) {
        sqlite3_stmt* stmt = nullptr;
        if (sqlite3_prepare_v2(db_, sql.c_str(), -1, &stmt, nullptr) != SQLITE_OK)
            throw BackendError(std::string(sqlite3_errmsg(db_)) + " while preparing: " + sql);
        SqlResult out;
        int n = sqlite3_column_count(stmt);
        for (int i = 0; i < n; ++i) {
            const char* name = sqlite3_column_name(stmt, i);
            out.columns.push_back(name ? name : "");
        }
        int rc;
        while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
            Row row;
            row.reserve(size_t(n));
            for (int i = 0; i < n; ++i) row.push_back(column_value(stmt, i));
            out.rows.push_back(std::move(row));
        }
        if (rc != SQLITE_DONE) {
            std::string msg = sqlite3_errmsg(db_);
            sqlite3_finalize(stmt);
            throw BackendError(msg + " while executing: " + sql);
        }
        sqlite3_finalize(stmt);
        return out;
    }

    sqlite3* raw() { return db_; }

private:
    static std::string quote_rel(const std::string& name) {
        return detail::sql_quote_ident(name);
    }

    static const char* sql_decl(ColumnType t) {
        switch (t) {
            case ColumnType::Integer: return "INTEGER";
            case ColumnType::Real: return "REAL";
            case ColumnType::Text: return "TEXT";
            case ColumnType::Date: return "TEXT";  // ISO-8601 text, chronologically ordered
        }
        return "TEXT";
    }

    static void bind_value(sqlite3_stmt* stmt, int idx, const Value& v) {
        if (v.is_null()) sqlite3_bind_null(stmt, idx);
        else if (v.is_integer()) sqlite3_bind_int64(stmt, idx, v.as_integer());
        else if (v.is_real()) sqlite3_bind_double(stmt, idx, v.as_real());
        else if (v.is_date()) {
            auto s = v.as_date().to_string();
            sqlite3_bind_text(stmt, idx, s.c_str(), int(s.size()), SQLITE_TRANSIENT);
        } else {
            sqlite3_bind_text(stmt, idx, v.as_text().c_str(), int(v.as_text().size()),
                              SQLITE_TRANSIENT);
        }
    }

    static Value column_value(sqlite3_stmt* stmt, int i) {
        switch (sqlite3_column_type(stmt, i)) {
            case SQLITE_NULL: return Value::null();
            case SQLITE_INTEGER: return Value::integer(sqlite3_column_int64(stmt, i));
            case SQLITE_FLOAT: return Value::real(sqlite3_column_double(stmt, i));
            case SQLITE_TEXT: {
                const unsigned char* s = sqlite3_column_text(stmt, i);
                return Value::text(reinterpret_cast<const char*>(s));
            }
            default: throw BackendError("unsupported sqlite column type");
        }
    }

    sqlite3* db_ = nullptr;
};

// ---------------------------------------------------------------------------
// Per-step SQL execution harness
// ---------------------------------------------------------------------------

struct StepSqlOutcome {
    bool success = false;
    std::string error;
    SqlResult result;
    std::string sql;
};

struct PerStepSqlReport {
    std::map<int, StepSqlOutcome> outcomes;
    ExecutionReport reference;  // native execution used for materialization

    size_t success_count() const {
        size_t n = 0;
        for (const auto& [id, o] : outcomes) n += o.success;
        return n;
    }
};

using StepSqlProvider =
    std::function<std::string(const Step&, const std::vector<Schema>& source_schemas)>;

// The deterministic emitter as a provider, sqlite-compatible with rowid
// tie-breaking (inputs are materialized tables, so rowid exists).
inline StepSqlProvider deterministic_sql_provider() {
    return [](const Step& step, const std::vector<Schema>& schemas) {
        EmitOptions options;
        options.dialect = SqlDialect::SqliteCompat;
        options.topsort_rowid_tiebreak = true;
        return emit_step_sql(step, schemas, options).sql;
    };
}

// Execute each step's SQL against inputs materialized from the native
// engine's results. Each step is measured independently, so one bad query
// never cascades: this is the execution-success-rate harness.
inline PerStepSqlReport run_per_step_sql(const Plan& plan, const Catalog& catalog,
                                         const StepSqlProvider& sql_for) {
    PerStepSqlReport report;
    report.reference = execute_plan(plan, catalog);
    SqliteDb db;
    for (const auto& table : catalog.tables()) db.materialize(*table, table->name());
    for (const auto& [id, res] : report.reference.results) {
        if (res.success) db.materialize(*res.table, "step_" + std::to_string(id));
    }
    for (const auto& step : plan.steps) {
        StepSqlOutcome outcome;
        std::vector<Schema> schemas;
        bool inputs_ok = true;
        for (const auto& src : step.source) {
            if (src.kind == SourceRef::Kind::InputTable) {
                auto t = catalog.find(src.table);
                if (!t) {
                    inputs_ok = false;
                    break;
                }
                schemas.push_back(t->schema());
            } else {
                auto it = report.reference.results.find(src.step_id);
                if (it == report.reference.results.end() || !it->second.success) {
                    inputs_ok = false;
                    break;
                }
                schemas.push_back(it->second.table->schema());
            }
        }
        if (!inputs_ok) {
            outcome.error = "reference inputs unavailable";
            report.outcomes.emplace(step.id, std::move(outcome));
            continue;
        }
        try {
            outcome.sql = sql_for(step, schemas);
            outcome.result = db.query(outcome.sql);
            outcome.success = true;
        } catch (const Error& e) {
            outcome.error = e.what();
        }
        report.outcomes.emplace(step.id, std::move(outcome));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Result comparison (native table vs SQL result)
// ---------------------------------------------------------------------------

namespace detail {

// Dates canonicalize to ISO text; SQLite hands Date columns back as TEXT.
inline Value canonical_value(const Value& v) {
    if (v.is_date()) return Value::text(v.as_date().to_string());
    return v;
}

inline bool values_match(const Value& a, const Value& b, double rel_eps) {
    Value x = canonical_value(a), y = canonical_value(b);
    if (x.is_null() || y.is_null()) return x.is_null() && y.is_null();
    if (x.is_numeric() && y.is_numeric()) {
        if (x.is_integer() && y.is_integer()) return x.as_integer() == y.as_integer();
        double dx = x.numeric(), dy = y.numeric();
        if (dx == dy) return true;
        double scale = std::max({1.0, std::fabs(dx), std::fabs(dy)});
        return std::fabs(dx - dy) <= rel_eps * scale;
    }
    if (x.is_text() && y.is_text()) return x.as_text() == y.as_text();
    return false;
}

struct CanonicalRowLess {
    bool operator()(const Row& a, const Row& b) const {
        for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
            int c = value_order(canonical_value(a[i]), canonical_value(b[i]));
            if (c != 0) return c < 0;
        }
        return a.size() < b.size();
    }
};

}  // namespace detail

// Multiset equality between a native table and a SQL result; column names
// must match in order, Reals compare within a relative epsilon (grouped
// floating-point sums are order-sensitive).
inline bool tables_multiset_equal(const Table& native, const SqlResult& sql, std::string* why,
                                  double rel_eps = 1e-9) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (sql.columns.size() != native.schema().width())
        return fail("column count differs: native " + std::to_string(native.schema().width()) +
                    " vs sql " + std::to_string(sql.columns.size()));
    for (size_t i = 0; i < sql.columns.size(); ++i) {
        if (!iequals(sql.columns[i], native.schema().at(i).name))
            return fail("column " + std::to_string(i + 1) + " name differs: native '" +
                        native.schema().at(i).name + "' vs sql '" + sql.columns[i] + "'");
    }
    if (sql.rows.size() != native.row_count())
        return fail("row count differs: native " + std::to_string(native.row_count()) +
                    " vs sql " + std::to_string(sql.rows.size()));
    std::vector<Row> a = native.rows();
    std::vector<Row> b = sql.rows;
    std::sort(a.begin(), a.end(), detail::CanonicalRowLess{});
    std::sort(b.begin(), b.end(), detail::CanonicalRowLess{});
    for (size_t r = 0; r < a.size(); ++r) {
        for (size_t c = 0; c < a[r].size(); ++c) {
            if (!detail::values_match(a[r][c], b[r][c], rel_eps))
                return fail("cell mismatch at sorted row " + std::to_string(r + 1) + ", column " +
                            std::to_string(c + 1) + ": native '" + a[r][c].to_display() +
                            "' vs sql '" + b[r][c].to_display() + "'");
        }
    }
    return true;
}

}  // namespace spage
