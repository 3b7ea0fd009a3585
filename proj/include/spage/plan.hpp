#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spage/expr.hpp"

namespace spage {

// The nine step operations. Closed set, no extension point.
enum class Operation { Scan, Aggregate, Filter, Sort, TopSort, Join, Except, Intersect, Union };

inline const char* operation_name(Operation op) {
    switch (op) {
        case Operation::Scan: return "Scan";
        case Operation::Aggregate: return "Aggregate";
        case Operation::Filter: return "Filter";
        case Operation::Sort: return "Sort";
        case Operation::TopSort: return "TopSort";
        case Operation::Join: return "Join";
        case Operation::Except: return "Except";
        case Operation::Intersect: return "Intersect";
        case Operation::Union: return "Union";
    }
    return "?";
}

inline std::optional<Operation> operation_from_name(const std::string& s) {
    for (Operation op : {Operation::Scan, Operation::Aggregate, Operation::Filter, Operation::Sort,
                         Operation::TopSort, Operation::Join, Operation::Except,
                         Operation::Intersect, Operation::Union}) {
        if (s == operation_name(op)) return op;
    }
    return std::nullopt;
}

inline bool is_set_operation(Operation op) {
    return op == Operation::Except || op == Operation::Intersect || op == Operation::Union;
}

inline bool is_sort_operation(Operation op) {
    return op == Operation::Sort || op == Operation::TopSort;
}

inline size_t operation_arity(Operation op) {
    return (op == Operation::Join || is_set_operation(op)) ? 2 : 1;
}

// One plan step: {ID, OPERATION, SOURCE, CONDITION, OUTPUT}. The condition is
// either a predicate (row filters, join keys), a sort spec (Sort/TopSort), or
// absent.
struct Step {
    int id = 0;
    Operation operation = Operation::Scan;
    std::vector<SourceRef> source;
    PredicatePtr predicate;          // null when absent
    std::optional<SortSpec> sort;    // Sort/TopSort only
    std::vector<OutputColumn> output;

    friend bool operator==(const Step& a, const Step& b) {
        return a.id == b.id && a.operation == b.operation && a.source == b.source &&
               predicate_equal(a.predicate, b.predicate) && a.sort == b.sort &&
               a.output == b.output;
    }
};

// Visits every expression in the step (predicate operands, sort keys,
// output expressions).
inline void for_each_expr(const Step& step, const std::function<void(const ExprPtr&)>& fn) {
    std::function<void(const PredicatePtr&)> walk_pred = [&](const PredicatePtr& p) {
        if (!p) return;
        if (p->is_compare()) {
            fn(p->as_compare().left);
            fn(p->as_compare().right);
        } else if (p->is_and()) {
            for (const auto& item : p->as_and().items) walk_pred(item);
        } else if (p->is_or()) {
            for (const auto& item : p->as_or().items) walk_pred(item);
        }
    };
    walk_pred(step.predicate);
    if (step.sort)
        for (const auto& key : step.sort->keys) fn(key.expr);
    for (const auto& out : step.output) fn(out.expr);
}

inline void for_each_column_ref(const ExprPtr& e,
                                const std::function<void(const Expr::ColumnRef&, bool)>& fn,
                                bool in_agg = false) {
    if (!e) return;
    if (e->is_column_ref()) {
        fn(e->as_column_ref(), in_agg);
    } else if (e->is_binary()) {
        for_each_column_ref(e->as_binary().left, fn, in_agg);
        for_each_column_ref(e->as_binary().right, fn, in_agg);
    } else if (e->is_agg()) {
        for_each_column_ref(e->as_agg().arg, fn, true);
    }
}

// Ordered sequence of steps forming the TaSoF plan. `validate_structure`
// enforces everything that is checkable without a catalog.
struct Plan {
    std::vector<Step> steps;

    const Step& step_by_id(int id) const { return steps.at(size_t(id) - 1); }
    size_t size() const { return steps.size(); }

    // ids referenced from any SOURCE list
    std::set<int> referenced_ids() const {
        std::set<int> refs;
        for (const auto& step : steps)
            for (const auto& src : step.source)
                if (src.kind == SourceRef::Kind::StepRef) refs.insert(src.step_id);
        return refs;
    }

    int terminal_id() const {
        auto refs = referenced_ids();
        for (const auto& step : steps)
            if (!refs.count(step.id)) return step.id;
        throw StructureError("plan has no terminal step");
    }

    void validate_structure() const {
        if (steps.empty()) throw StructureError("plan has no steps");
        std::set<int> seen;
        for (const auto& step : steps) {
            if (step.id < 1) throw StructureError("step ids must be positive");
            if (!seen.insert(step.id).second)
                throw DuplicateIdError("duplicate step id: " + std::to_string(step.id));
        }
        for (size_t i = 0; i < steps.size(); ++i) {
            if (steps[i].id != int(i) + 1)
                throw StructureError("step ids must be consecutive 1..n; found id " +
                                     std::to_string(steps[i].id) + " at position " +
                                     std::to_string(i + 1));
        }
        for (const auto& step : steps) check_step(step);
        auto refs = referenced_ids();
        int terminals = 0;
        for (const auto& step : steps)
            if (!refs.count(step.id)) ++terminals;
        if (terminals != 1)
            throw StructureError("plan must have exactly one terminal step; found " +
                                 std::to_string(terminals));
    }

private:
    void check_step(const Step& step) const {
        const std::string where = "step " + std::to_string(step.id);
        size_t arity = operation_arity(step.operation);
        if (step.source.size() != arity)
            throw StructureError(where + ": " + operation_name(step.operation) + " takes " +
                                 std::to_string(arity) + " source(s), got " +
                                 std::to_string(step.source.size()));
        for (const auto& src : step.source) {
            if (src.kind == SourceRef::Kind::StepRef) {
                if (src.step_id >= step.id)
                    throw ReferenceError(where + ": refers to Step" +
                                         std::to_string(src.step_id) +
                                         " which is not an earlier step");
                if (src.step_id < 1 || src.step_id > int(steps.size()))
                    throw ReferenceError(where + ": dangling reference Step" +
                                         std::to_string(src.step_id));
            }
        }
        if (is_sort_operation(step.operation)) {
            if (step.predicate) throw StructureError(where + ": sort steps take a sort condition");
            if (!step.sort) throw StructureError(where + ": missing ORDER BY condition");
            if (step.operation == Operation::TopSort && !step.sort->limit)
                throw StructureError(where + ": TopSort requires a LIMIT");
            if (step.operation == Operation::Sort && step.sort->limit)
                throw StructureError(where + ": LIMIT is only valid for TopSort");
        } else if (step.sort) {
            throw StructureError(where + ": ORDER BY condition is only valid for Sort/TopSort");
        }
        if (is_set_operation(step.operation)) {
            if (!step.output.empty())
                throw StructureError(where + ": set operations inherit the left schema; OUTPUT "
                                             "must be empty");
            if (step.predicate) throw StructureError(where + ": set operations take no condition");
        } else if (step.output.empty()) {
            throw StructureError(where + ": OUTPUT must not be empty");
        }
        // expression-level qualifiers must also point backwards
        for_each_expr(step, [&](const ExprPtr& e) {
            for_each_column_ref(e, [&](const Expr::ColumnRef& ref, bool) {
                if (ref.qualifier && ref.qualifier->kind == SourceRef::Kind::StepRef &&
                    ref.qualifier->step_id >= step.id)
                    throw ReferenceError(where + ": expression refers to Step" +
                                         std::to_string(ref.qualifier->step_id) +
                                         " which is not an earlier step");
            });
        });
    }
};

}  // namespace spage
