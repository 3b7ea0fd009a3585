#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <semaphore>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "spage/binder.hpp"
#include "spage/plan.hpp"
#include "spage/plan_graph.hpp"
#include "spage/table.hpp"

namespace spage {

enum class FailureClass { Schema, Type, Runtime, Timeout };

inline const char* failure_class_name(FailureClass c) {
    switch (c) {
        case FailureClass::Schema: return "SchemaError";
        case FailureClass::Type: return "TypeError";
        case FailureClass::Runtime: return "RuntimeError";
        case FailureClass::Timeout: return "Timeout";
    }
    return "?";
}

struct StepResult {
    int step_id = 0;
    bool success = false;
    TablePtr table;  // set on success
    FailureClass error_class = FailureClass::Runtime;
    std::string message;
    double wall_time_s = 0;
};

enum class ExecMode { Sequential, Wavefront };

struct ExecOptions {
    ExecMode mode = ExecMode::Wavefront;
    int jobs = int(std::thread::hardware_concurrency());
    std::chrono::milliseconds step_timeout{10000};
};

struct ExecutionReport {
    std::map<int, StepResult> results;
    int cycles_used = 0;
    double esr = 0;  // successful steps / total steps
    TablePtr terminal_table;
    int graph_depth = 0;
    ExecMode mode = ExecMode::Wavefront;

    size_t step_count() const { return results.size(); }
    size_t success_count() const {
        size_t n = 0;
        for (const auto& [id, r] : results) n += r.success;
        return n;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json doc;
        doc["mode"] = mode == ExecMode::Sequential ? "sequential" : "graph";
        doc["cycles_used"] = cycles_used;
        doc["graph_depth"] = graph_depth;
        doc["esr"] = esr;
        doc["steps"] = nlohmann::ordered_json::array();
        for (const auto& [id, r] : results) {
            nlohmann::ordered_json sj;
            sj["id"] = id;
            sj["status"] = r.success ? "success" : "failure";
            if (r.success) {
                sj["rows"] = r.table->row_count();
            } else {
                sj["error_class"] = failure_class_name(r.error_class);
                sj["message"] = r.message;
            }
            sj["wall_time_ms"] = r.wall_time_s * 1000.0;
            doc["steps"].push_back(std::move(sj));
        }
        doc["terminal_succeeded"] = terminal_table != nullptr;
        return doc;
    }
};

using Registry = std::map<int, TablePtr>;

namespace detail {

struct ExecContext {
    std::chrono::steady_clock::time_point deadline;
    mutable unsigned tick = 0;

    void check() const {
        if ((++tick & 1023u) != 0) return;
        if (std::chrono::steady_clock::now() > deadline)
            throw TimeoutError("step exceeded its time budget");
    }
};

// ---- scalar evaluation ----------------------------------------------------

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw EvalError("integer overflow");
    return r;
}
inline std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_sub_overflow(a, b, &r)) throw EvalError("integer overflow");
    return r;
}
inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw EvalError("integer overflow");
    return r;
}

inline Value eval_binary(BinOp op, const Value& l, const Value& r) {
    if (l.is_null() || r.is_null()) return Value::null();
    if (op == BinOp::Sub && l.is_date() && r.is_date())
        return Value::integer(std::int64_t(l.as_date().days) - std::int64_t(r.as_date().days));
    if (!l.is_numeric() || !r.is_numeric())
        throw TypeError(std::string("arithmetic on ") +
                        column_type_name(l.type().value_or(ColumnType::Text)) + " and " +
                        column_type_name(r.type().value_or(ColumnType::Text)));
    if (op == BinOp::Div) {
        double d = r.numeric();
        if (d == 0.0) throw EvalError("division by zero");
        return Value::real(l.numeric() / d);
    }
    if (l.is_integer() && r.is_integer()) {
        switch (op) {
            case BinOp::Add: return Value::integer(checked_add(l.as_integer(), r.as_integer()));
            case BinOp::Sub: return Value::integer(checked_sub(l.as_integer(), r.as_integer()));
            case BinOp::Mul: return Value::integer(checked_mul(l.as_integer(), r.as_integer()));
            default: break;
        }
    }
    double a = l.numeric(), b = r.numeric();
    switch (op) {
        case BinOp::Add: return Value::real(a + b);
        case BinOp::Sub: return Value::real(a - b);
        case BinOp::Mul: return Value::real(a * b);
        default: break;
    }
    throw EvalError("unknown operator");
}

// Date columns compare chronologically against ISO-shaped text.
inline Ordering compare_with_date_coercion(const Value& a, const Value& b) {
    if (a.is_date() && b.is_text()) {
        if (auto d = Date::parse(b.as_text())) return compare_values(a, Value::date(*d));
    } else if (b.is_date() && a.is_text()) {
        if (auto d = Date::parse(a.as_text())) return compare_values(Value::date(*d), b);
    }
    return compare_values(a, b);
}

inline bool ordering_satisfies(CmpOp op, Ordering ord) {
    if (ord == Ordering::Incomparable) return false;
    switch (op) {
        case CmpOp::Eq: return ord == Ordering::Equal;
        case CmpOp::Ne: return ord != Ordering::Equal;
        case CmpOp::Lt: return ord == Ordering::Less;
        case CmpOp::Le: return ord != Ordering::Greater;
        case CmpOp::Gt: return ord == Ordering::Greater;
        case CmpOp::Ge: return ord != Ordering::Less;
    }
    return false;
}

// Deterministic total order over values, used for grouping, hashing-free
// join lookup and set-operation membership. Nulls sort first; within a kind
// the order matches compare_values; NaN compares equal to NaN.
inline int value_kind_rank(const Value& v) {
    if (v.is_null()) return 0;
    if (v.is_numeric()) return 1;
    if (v.is_text()) return 2;
    return 3;
}

inline int value_order(const Value& a, const Value& b) {
    int ra = value_kind_rank(a), rb = value_kind_rank(b);
    if (ra != rb) return ra < rb ? -1 : 1;
    if (ra == 0) return 0;
    if (ra == 1) {
        double x = a.numeric(), y = b.numeric();
        bool nx = std::isnan(x), ny = std::isnan(y);
        if (nx || ny) return nx == ny ? 0 : (nx ? 1 : -1);
        if (x != y) return x < y ? -1 : 1;
        return 0;
    }
    if (ra == 2) {
        int c = a.as_text().compare(b.as_text());
        return c < 0 ? -1 : c > 0 ? 1 : 0;
    }
    if (a.as_date().days != b.as_date().days) return a.as_date().days < b.as_date().days ? -1 : 1;
    return 0;
}

struct RowOrderLess {
    bool operator()(const Row& a, const Row& b) const {
        for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
            int c = value_order(a[i], b[i]);
            if (c != 0) return c < 0;
        }
        return a.size() < b.size();
    }
};

struct ValueOrderLess {
    bool operator()(const Value& a, const Value& b) const { return value_order(a, b) < 0; }
};

// ---- per-step evaluator ---------------------------------------------------

class StepEvaluator {
public:
    StepEvaluator(const Step& step, std::vector<TablePtr> inputs, const ExecContext& exec)
        : step_(step), inputs_(std::move(inputs)), exec_(exec) {
        for (size_t i = 0; i < inputs_.size(); ++i)
            ctx_.add_source(step.source[i], inputs_[i]->schema());
    }

    Table run() {
        switch (step_.operation) {
            case Operation::Scan:
            case Operation::Filter: return run_filter();
            case Operation::Aggregate: return run_aggregate();
            case Operation::Sort: return run_sort(std::nullopt);
            case Operation::TopSort: return run_sort(step_.sort->limit);
            case Operation::Join: return run_join();
            case Operation::Except:
            case Operation::Intersect:
            case Operation::Union: return run_set_op();
        }
        throw EvalError("unknown operation");
    }

private:
    using Rows = std::array<const Row*, 2>;

    const StepContext::Resolved& resolve(const Expr* node, const Expr::ColumnRef& ref) {
        auto it = resolved_.find(node);
        if (it != resolved_.end()) return it->second;
        return resolved_.emplace(node, ctx_.resolve(ref)).first->second;
    }

    Value eval(const ExprPtr& e, const Rows& rows) {
        exec_.check();
        if (e->is_column_ref()) {
            const auto& r = resolve(e.get(), e->as_column_ref());
            return (*rows[r.source])[r.column];
        }
        if (e->is_literal()) return e->as_literal().value;
        if (e->is_binary()) {
            const auto& b = e->as_binary();
            return eval_binary(b.op, eval(b.left, rows), eval(b.right, rows));
        }
        throw EvalError("aggregate call evaluated outside an Aggregate step");
    }

    bool eval_predicate(const PredicatePtr& p, const Rows& rows) {
        if (!p || p->is_true()) return true;
        if (p->is_compare()) {
            const auto& c = p->as_compare();
            Ordering ord = compare_with_date_coercion(eval(c.left, rows), eval(c.right, rows));
            return ordering_satisfies(c.op, ord);
        }
        if (p->is_and()) {
            for (const auto& item : p->as_and().items)
                if (!eval_predicate(item, rows)) return false;
            return true;
        }
        for (const auto& item : p->as_or().items)
            if (eval_predicate(item, rows)) return true;
        return false;
    }

    Row project(const Rows& rows) {
        Row out;
        out.reserve(step_.output.size());
        for (const auto& col : step_.output) out.push_back(eval(col.expr, rows));
        return out;
    }

    Schema output_schema() { return infer_output_schema(step_, ctx_); }

    std::string result_name() const { return "step_" + std::to_string(step_.id); }

    Table run_filter() {
        const Table& src = *inputs_[0];
        Schema schema = output_schema();
        std::vector<Row> rows;
        for (const Row& row : src.rows()) {
            exec_.check();
            Rows ctx{&row, nullptr};
            if (eval_predicate(step_.predicate, ctx)) rows.push_back(project(ctx));
        }
        return Table(result_name(), std::move(schema), std::move(rows));
    }

    Table run_sort(std::optional<std::int64_t> limit) {
        const Table& src = *inputs_[0];
        Schema schema = output_schema();
        std::vector<size_t> order(src.row_count());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        const auto& keys = step_.sort->keys;
        // precompute key values so the comparator stays cheap and exception-free
        std::vector<std::vector<Value>> key_vals(src.row_count());
        for (size_t i = 0; i < src.row_count(); ++i) {
            Rows ctx{&src.rows()[i], nullptr};
            for (const auto& k : keys) key_vals[i].push_back(eval(k.expr, ctx));
        }
        // cross-kind keys are a runtime error; probe once up front
        for (size_t c = 0; c < keys.size(); ++c) {
            const Value* first = nullptr;
            for (size_t i = 0; i < src.row_count(); ++i) {
                const Value& v = key_vals[i][c];
                if (v.is_null()) continue;
                if (!first) first = &v;
                else if (compare_values(*first, v) == Ordering::Incomparable)
                    throw EvalError("sort key mixes incomparable kinds");
            }
        }
        std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            for (size_t c = 0; c < keys.size(); ++c) {
                const Value& va = key_vals[a][c];
                const Value& vb = key_vals[b][c];
                if (va.is_null() && vb.is_null()) continue;
                if (va.is_null()) return false;  // nulls last
                if (vb.is_null()) return true;
                Ordering ord = compare_values(va, vb);
                if (ord == Ordering::Equal) continue;
                bool less = ord == Ordering::Less;
                return keys[c].descending ? !less : less;
            }
            return false;
        });
        size_t n = order.size();
        if (limit && std::size_t(*limit) < n) n = size_t(*limit);
        std::vector<Row> rows;
        rows.reserve(n);
        for (size_t i = 0; i < n; ++i) {
            Rows ctx{&src.rows()[order[i]], nullptr};
            rows.push_back(project(ctx));
        }
        return Table(result_name(), std::move(schema), std::move(rows));
    }

    Table run_join() {
        const Table& left = *inputs_[0];
        const Table& right = *inputs_[1];
        Schema schema = output_schema();
        std::vector<Row> rows;
        if (auto hash_keys = single_equality_keys()) {
            auto [lk, rk] = *hash_keys;
            std::map<Value, std::vector<size_t>, ValueOrderLess> index;
            for (size_t r = 0; r < right.row_count(); ++r) {
                const Value& v = right.rows()[r][rk];
                if (!v.is_null()) index[v].push_back(r);
            }
            for (size_t l = 0; l < left.row_count(); ++l) {
                exec_.check();
                const Value& v = left.rows()[l][lk];
                if (v.is_null()) continue;
                auto it = index.find(v);
                if (it == index.end()) continue;
                for (size_t r : it->second) {
                    Rows ctx{&left.rows()[l], &right.rows()[r]};
                    rows.push_back(project(ctx));
                }
            }
        } else {
            for (const Row& lr : left.rows()) {
                for (const Row& rr : right.rows()) {
                    exec_.check();
                    Rows ctx{&lr, &rr};
                    if (eval_predicate(step_.predicate, ctx)) rows.push_back(project(ctx));
                }
            }
        }
        return Table(result_name(), std::move(schema), std::move(rows));
    }

    // Hash-joinable shape: a single equality between one column of each side
    // with identical, exactly-orderable types.
    std::optional<std::pair<size_t, size_t>> single_equality_keys() {
        const auto& p = step_.predicate;
        if (!p || !p->is_compare() || p->as_compare().op != CmpOp::Eq) return std::nullopt;
        const auto& c = p->as_compare();
        if (!c.left->is_column_ref() || !c.right->is_column_ref()) return std::nullopt;
        StepContext::Resolved a, b;
        try {
            a = ctx_.resolve(c.left->as_column_ref());
            b = ctx_.resolve(c.right->as_column_ref());
        } catch (const BindError&) {
            return std::nullopt;  // let the nested loop surface the real error
        }
        if (a.source == b.source || a.type != b.type) return std::nullopt;
        if (a.type == ColumnType::Real) return std::nullopt;
        if (a.source == 1) std::swap(a, b);
        return std::make_pair(a.column, b.column);
    }

    struct AggAcc {
        std::int64_t count = 0;
        std::int64_t isum = 0;
        double rsum = 0;
        bool any = false;
        Value best;
    };

    static void accumulate(AggAcc& acc, AggFn fn, const Value& v) {
        if (v.is_null()) return;
        switch (fn) {
            case AggFn::Count:
                acc.count++;
                return;
            case AggFn::Sum:
            case AggFn::Avg:
                if (!v.is_numeric())
                    throw TypeError(std::string(agg_fn_name(fn)) + " over non-numeric value");
                acc.count++;
                acc.any = true;
                if (v.is_integer()) acc.isum = checked_add(acc.isum, v.as_integer());
                else acc.rsum += v.as_real();
                return;
            case AggFn::Min:
            case AggFn::Max: {
                if (!acc.any) {
                    acc.best = v;
                    acc.any = true;
                    return;
                }
                Ordering ord = compare_values(v, acc.best);
                if (ord == Ordering::Incomparable)
                    throw EvalError("incomparable values under MIN/MAX");
                if ((fn == AggFn::Min && ord == Ordering::Less) ||
                    (fn == AggFn::Max && ord == Ordering::Greater))
                    acc.best = v;
                return;
            }
        }
    }

    static Value finalize(const AggAcc& acc, AggFn fn, bool integer_arg, std::int64_t group_rows,
                          bool star) {
        switch (fn) {
            case AggFn::Count: return Value::integer(star ? group_rows : acc.count);
            case AggFn::Sum:
                if (!acc.any) return Value::null();
                return integer_arg ? Value::integer(acc.isum) : Value::real(acc.rsum);
            case AggFn::Avg:
                if (!acc.any) return Value::null();
                return Value::real((integer_arg ? double(acc.isum) : acc.rsum) /
                                   double(acc.count));
            case AggFn::Min:
            case AggFn::Max: return acc.any ? acc.best : Value::null();
        }
        return Value::null();
    }

    Table run_aggregate() {
        const Table& src = *inputs_[0];
        Schema schema = output_schema();
        auto shape = aggregate_shape(step_);

        // collect the aggregate call nodes in output order
        std::vector<const Expr*> agg_nodes;
        std::function<void(const ExprPtr&)> collect = [&](const ExprPtr& e) {
            if (!e) return;
            if (e->is_agg()) {
                agg_nodes.push_back(e.get());
                return;  // aggregates never nest
            }
            if (e->is_binary()) {
                collect(e->as_binary().left);
                collect(e->as_binary().right);
            }
        };
        for (size_t i : shape.agg_outputs) collect(step_.output[i].expr);

        struct Group {
            Row key;
            size_t first_row;
            std::int64_t row_count = 0;
            std::vector<AggAcc> accs;
        };
        std::vector<Group> groups;
        std::map<Row, size_t, RowOrderLess> group_index;

        for (size_t r = 0; r < src.row_count(); ++r) {
            exec_.check();
            Rows ctx{&src.rows()[r], nullptr};
            if (!eval_predicate(step_.predicate, ctx)) continue;
            Row key;
            key.reserve(shape.key_outputs.size());
            for (size_t i : shape.key_outputs) key.push_back(eval(step_.output[i].expr, ctx));
            size_t gi;
            auto it = group_index.find(key);
            if (it == group_index.end()) {
                gi = groups.size();
                group_index.emplace(key, gi);
                groups.push_back({std::move(key), r, 0, std::vector<AggAcc>(agg_nodes.size())});
            } else {
                gi = it->second;
            }
            Group& g = groups[gi];
            g.row_count++;
            for (size_t a = 0; a < agg_nodes.size(); ++a) {
                const auto& call = agg_nodes[a]->as_agg();
                if (!call.arg) continue;  // COUNT(*) only needs row_count
                accumulate(g.accs[a], call.fn, eval(call.arg, ctx));
            }
        }
        // a global aggregate over empty input still yields one row
        if (shape.global() && groups.empty())
            groups.push_back({Row{}, 0, 0, std::vector<AggAcc>(agg_nodes.size())});

        std::vector<Row> rows;
        rows.reserve(groups.size());
        for (const Group& g : groups) {
            std::map<const Expr*, Value> agg_values;
            for (size_t a = 0; a < agg_nodes.size(); ++a) {
                const auto& call = agg_nodes[a]->as_agg();
                bool integer_arg = true;
                if (call.arg) {
                    ColumnType t = infer_expr_type(call.arg, ctx_, false);
                    integer_arg = t == ColumnType::Integer;
                }
                agg_values[agg_nodes[a]] =
                    finalize(g.accs[a], call.fn, integer_arg, g.row_count, !call.arg);
            }
            const Row* first = g.row_count > 0 ? &src.rows()[g.first_row] : nullptr;
            Row out;
            out.reserve(step_.output.size());
            size_t key_pos = 0;
            for (size_t i = 0; i < step_.output.size(); ++i) {
                if (expr_contains_agg(step_.output[i].expr)) {
                    out.push_back(eval_with_aggs(step_.output[i].expr, agg_values, first));
                } else {
                    out.push_back(g.key[key_pos++]);
                }
            }
            rows.push_back(std::move(out));
        }
        return Table(result_name(), std::move(schema), std::move(rows));
    }

    Value eval_with_aggs(const ExprPtr& e, const std::map<const Expr*, Value>& agg_values,
                         const Row* first_row) {
        if (e->is_agg()) return agg_values.at(e.get());
        if (e->is_literal()) return e->as_literal().value;
        if (e->is_column_ref()) {
            if (!first_row) return Value::null();  // empty global group
            const auto& r = resolve(e.get(), e->as_column_ref());
            return (*first_row)[r.column];
        }
        const auto& b = e->as_binary();
        return eval_binary(b.op, eval_with_aggs(b.left, agg_values, first_row),
                           eval_with_aggs(b.right, agg_values, first_row));
    }

    Table run_set_op() {
        const Table& left = *inputs_[0];
        const Table& right = *inputs_[1];
        if (!left.schema().type_compatible_with(right.schema()))
            throw TypeError("set operation sources are not type-compatible");
        Schema schema = left.schema();  // names from the left source
        std::map<Row, bool, RowOrderLess> right_set;
        for (const Row& r : right.rows()) right_set.emplace(r, true);
        std::map<Row, bool, RowOrderLess> emitted;
        std::vector<Row> rows;
        auto emit_once = [&](const Row& r) {
            if (emitted.emplace(r, true).second) rows.push_back(r);
        };
        switch (step_.operation) {
            case Operation::Union:
                for (const Row& r : left.rows()) emit_once(r);
                for (const Row& r : right.rows()) emit_once(r);
                break;
            case Operation::Intersect:
                for (const Row& r : left.rows())
                    if (right_set.count(r)) emit_once(r);
                break;
            case Operation::Except:
                for (const Row& r : left.rows())
                    if (!right_set.count(r)) emit_once(r);
                break;
            default: throw EvalError("not a set operation");
        }
        return Table(result_name(), std::move(schema), std::move(rows));
    }

    const Step& step_;
    std::vector<TablePtr> inputs_;
    const ExecContext& exec_;
    StepContext ctx_;
    std::unordered_map<const Expr*, StepContext::Resolved> resolved_;
};

inline FailureClass classify_exception(const Error& e) {
    if (dynamic_cast<const TimeoutError*>(&e)) return FailureClass::Timeout;
    if (dynamic_cast<const SchemaError*>(&e)) return FailureClass::Schema;
    if (dynamic_cast<const TypeError*>(&e)) return FailureClass::Type;
    if (const auto* b = dynamic_cast<const BindError*>(&e)) {
        switch (b->code()) {
            case DiagCode::UnknownSource:
            case DiagCode::UnknownColumn:
            case DiagCode::AmbiguousColumn:
            case DiagCode::DuplicateOutputColumn:
            case DiagCode::MissingAlias: return FailureClass::Schema;
            default: return FailureClass::Type;
        }
    }
    return FailureClass::Runtime;
}

}  // namespace detail

// Execute one step against already-resolved inputs. Throws on failure; the
// plan runner turns exceptions into StepResult failures.
inline Table execute_step(const Step& step, const Registry& registry, const Catalog& catalog,
                          std::chrono::milliseconds timeout = std::chrono::milliseconds(10000)) {
    std::vector<TablePtr> inputs;
    for (const auto& src : step.source) {
        if (src.kind == SourceRef::Kind::InputTable) {
            auto t = catalog.find(src.table);
            if (!t) throw SchemaError("no table '" + src.table + "' in the catalog");
            inputs.push_back(std::move(t));
        } else {
            auto it = registry.find(src.step_id);
            if (it == registry.end())
                throw SchemaError("Step" + std::to_string(src.step_id) +
                                  " has no published result");
            inputs.push_back(it->second);
        }
    }
    detail::ExecContext exec{std::chrono::steady_clock::now() + timeout};
    return detail::StepEvaluator(step, std::move(inputs), exec).run();
}

// Run a whole plan. Wavefront mode executes each wavefront's steps
// concurrently and publishes results between wavefronts; a step whose
// predecessor failed is marked as a runtime failure without executing.
// Result tables are identical across both modes and across runs.
inline ExecutionReport execute_plan(const Plan& plan, const Catalog& catalog,
                                    const ExecOptions& options = {}) {
    plan.validate_structure();
    PlanGraph graph = build_graph(plan);
    ExecutionReport report;
    report.mode = options.mode;
    report.graph_depth = graph.depth;
    Registry registry;

    auto run_one = [&](const Step& step) -> StepResult {
        StepResult result;
        result.step_id = step.id;
        auto start = std::chrono::steady_clock::now();
        try {
            Table t = execute_step(step, registry, catalog, options.step_timeout);
            result.success = true;
            result.table = std::make_shared<Table>(std::move(t));
        } catch (const Error& e) {
            result.error_class = detail::classify_exception(e);
            result.message = e.what();
        } catch (const std::exception& e) {
            result.error_class = FailureClass::Runtime;
            result.message = e.what();
        }
        result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                                 .count();
        return result;
    };

    auto upstream_failed = [&](const Step& step) {
        for (const auto& src : step.source) {
            if (src.kind != SourceRef::Kind::StepRef) continue;
            auto it = report.results.find(src.step_id);
            if (it == report.results.end() || !it->second.success) return true;
        }
        return false;
    };

    auto mark_upstream_failure = [&](const Step& step) {
        StepResult r;
        r.step_id = step.id;
        r.error_class = FailureClass::Runtime;
        r.message = "upstream failure";
        report.results.emplace(step.id, std::move(r));
    };

    if (options.mode == ExecMode::Sequential) {
        for (const auto& step : plan.steps) {
            if (upstream_failed(step)) {
                mark_upstream_failure(step);
                continue;
            }
            StepResult r = run_one(step);
            if (r.success) registry.emplace(step.id, r.table);
            report.results.emplace(step.id, std::move(r));
        }
        report.cycles_used = int(plan.size());
    } else {
        int jobs = std::max(1, options.jobs);
        for (const auto& wavefront : graph.wavefronts) {
            std::vector<const Step*> runnable;
            for (int id : wavefront) {
                const Step& step = plan.step_by_id(id);
                if (upstream_failed(step)) mark_upstream_failure(step);
                else runnable.push_back(&step);
            }
            if (runnable.empty()) continue;
            report.cycles_used++;
            if (runnable.size() == 1 || jobs == 1) {
                for (const Step* step : runnable) {
                    StepResult r = run_one(*step);
                    if (r.success) registry.emplace(step->id, r.table);
                    report.results.emplace(step->id, std::move(r));
                }
            } else {
                std::counting_semaphore<> gate(jobs);
                std::vector<std::future<StepResult>> futures;
                futures.reserve(runnable.size());
                for (const Step* step : runnable) {
                    futures.push_back(std::async(std::launch::async, [&, step] {
                        gate.acquire();
                        StepResult r = run_one(*step);
                        gate.release();
                        return r;
                    }));
                }
                // join the whole wavefront before touching the registry; the
                // running steps read it concurrently
                std::vector<StepResult> results;
                results.reserve(runnable.size());
                for (auto& f : futures) results.push_back(f.get());
                for (size_t i = 0; i < runnable.size(); ++i) {
                    StepResult& r = results[i];
                    if (r.success) registry.emplace(runnable[i]->id, r.table);
                    report.results.emplace(runnable[i]->id, std::move(r));
                }
            }
        }
    }

    size_t successes = report.success_count();
    report.esr = plan.size() ? double(successes) / double(plan.size()) : 0.0;
    int terminal = plan.terminal_id();
    auto it = report.results.find(terminal);
    if (it != report.results.end() && it->second.success) report.terminal_table = it->second.table;
    return report;
}

// Rebuild the report skeleton (statuses, cycles, depth) from its JSON form;
// result tables are not representable and stay empty. Used by `eval` to
// rejoin persisted run outputs.
inline ExecutionReport execution_report_from_json(const nlohmann::json& doc) {
    ExecutionReport report;
    report.mode = doc.value("mode", "graph") == std::string("sequential") ? ExecMode::Sequential
                                                                          : ExecMode::Wavefront;
    report.cycles_used = doc.value("cycles_used", 0);
    report.graph_depth = doc.value("graph_depth", 0);
    report.esr = doc.value("esr", 0.0);
    if (doc.contains("steps")) {
        for (const auto& sj : doc["steps"]) {
            StepResult r;
            r.step_id = sj.at("id").get<int>();
            r.success = sj.at("status").get<std::string>() == "success";
            if (!r.success && sj.contains("message")) r.message = sj["message"].get<std::string>();
            if (sj.contains("wall_time_ms")) r.wall_time_s = sj["wall_time_ms"].get<double>() / 1000.0;
            report.results.emplace(r.step_id, std::move(r));
        }
    }
    return report;
}

// Pooled ESR: total successful steps over total steps across reports.
inline double pooled_esr(const std::vector<ExecutionReport>& reports) {
    if (reports.empty()) throw EmptyInput("esr needs at least one report");
    size_t success = 0, total = 0;
    for (const auto& r : reports) {
        success += r.success_count();
        total += r.step_count();
    }
    return total ? double(success) / double(total) : 0.0;
}

}  // namespace spage
