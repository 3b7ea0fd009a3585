#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spage/binder.hpp"
#include "spage/plan.hpp"

namespace spage {

enum class Severity { Error, Warning };

struct Diagnostic {
    int step_id = 0;
    Severity severity = Severity::Error;
    DiagCode code = DiagCode::TypeMismatch;
    std::string message;
};

struct EngineCapabilities {
    bool non_equi_join = true;  // the native engine evaluates arbitrary join predicates
};

// Outcome of schema-aware validation: diagnostics plus the statically
// inferred output schema of every step not blocked by an upstream error.
struct ValidationReport {
    std::vector<Diagnostic> diagnostics;
    std::map<int, Schema> inferred_schemas;

    bool ok() const {
        for (const auto& d : diagnostics)
            if (d.severity == Severity::Error) return false;
        return true;
    }

    std::vector<Diagnostic> errors() const {
        std::vector<Diagnostic> out;
        for (const auto& d : diagnostics)
            if (d.severity == Severity::Error) out.push_back(d);
        return out;
    }

    bool has_error_code(DiagCode code) const {
        for (const auto& d : diagnostics)
            if (d.severity == Severity::Error && d.code == code) return true;
        return false;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json doc;
        doc["executable"] = ok();
        doc["diagnostics"] = nlohmann::ordered_json::array();
        for (const auto& d : diagnostics) {
            doc["diagnostics"].push_back(
                {{"step", d.step_id},
                 {"severity", d.severity == Severity::Error ? "Error" : "Warning"},
                 {"code", diag_code_name(d.code)},
                 {"message", d.message}});
        }
        doc["inferred_schemas"] = nlohmann::ordered_json::object();
        for (const auto& [id, schema] : inferred_schemas) {
            nlohmann::ordered_json cols = nlohmann::ordered_json::array();
            for (const auto& col : schema.columns())
                cols.push_back({{"name", col.name}, {"type", column_type_name(col.type)}});
            doc["inferred_schemas"]["Step" + std::to_string(id)] = std::move(cols);
        }
        return doc;
    }
};

namespace detail {

class PlanValidator {
public:
    PlanValidator(const Plan& plan, const Catalog& catalog, const EngineCapabilities& caps)
        : plan_(plan), catalog_(catalog), caps_(caps) {}

    ValidationReport run() {
        auto refs = plan_.referenced_ids();
        int terminal = -1;
        for (const auto& step : plan_.steps)
            if (!refs.count(step.id)) terminal = step.id;
        for (const auto& step : plan_.steps) {
            if (!refs.count(step.id) && step.id != terminal)
                warn(step.id, DiagCode::UnusedStep, "step result is never referenced");
            validate_step(step);
        }
        return std::move(report_);
    }

private:
    void error(int id, DiagCode code, const std::string& msg) {
        report_.diagnostics.push_back({id, Severity::Error, code, msg});
    }
    void warn(int id, DiagCode code, const std::string& msg) {
        report_.diagnostics.push_back({id, Severity::Warning, code, msg});
    }

    // Returns false when a source is unknown or blocked by an upstream error.
    bool build_context(const Step& step, StepContext& ctx, bool& blocked) {
        for (const auto& src : step.source) {
            if (src.kind == SourceRef::Kind::InputTable) {
                auto table = catalog_.find(src.table);
                if (!table) {
                    error(step.id, DiagCode::UnknownSource,
                          "no table '" + src.table + "' in the catalog");
                    return false;
                }
                ctx.add_source(src, table->schema());
            } else {
                auto it = report_.inferred_schemas.find(src.step_id);
                if (it == report_.inferred_schemas.end()) {
                    blocked = true;  // upstream step already failed validation
                    return false;
                }
                ctx.add_source(src, it->second);
            }
        }
        return true;
    }

    void validate_step(const Step& step) {
        StepContext ctx;
        bool blocked = false;
        if (!build_context(step, ctx, blocked)) return;
        try {
            Schema schema = step_schema(step, ctx);
            report_.inferred_schemas.emplace(step.id, std::move(schema));
        } catch (const BindError& e) {
            error(step.id, e.code(), e.what());
        }
    }

    Schema step_schema(const Step& step, const StepContext& ctx) {
        switch (step.operation) {
            case Operation::Scan:
            case Operation::Filter:
                check_predicate_types(step.predicate, ctx);
                return infer_output_schema(step, ctx);
            case Operation::Aggregate: {
                auto shape = aggregate_shape(step);
                if (shape.global())
                    warn(step.id, DiagCode::ImplicitGlobalAggregate,
                         "no non-aggregate outputs; computing a single global group");
                check_predicate_types(step.predicate, ctx);
                check_aggregate_grouping(step, ctx);
                return infer_output_schema(step, ctx);
            }
            case Operation::Sort:
            case Operation::TopSort:
                for (const auto& key : step.sort->keys) infer_expr_type(key.expr, ctx, false);
                return infer_output_schema(step, ctx);
            case Operation::Join:
                if (!caps_.non_equi_join && !is_equi_join_predicate(step.predicate))
                    throw BindError(DiagCode::NonEquiJoinUnsupported,
                                    "the configured engine only supports equality joins");
                check_predicate_types(step.predicate, ctx);
                return infer_output_schema(step, ctx);
            case Operation::Except:
            case Operation::Intersect:
            case Operation::Union: {
                const Schema& left = ctx.source_schema(0);
                const Schema& right = ctx.source_schema(1);
                if (!left.type_compatible_with(right)) {
                    std::string msg = "set operation sources are not type-compatible: left has " +
                                      std::to_string(left.width()) + " column(s), right has " +
                                      std::to_string(right.width());
                    if (left.width() == right.width()) {
                        for (size_t i = 0; i < left.width(); ++i) {
                            if (left.at(i).type != right.at(i).type) {
                                msg = "set operation column " + std::to_string(i + 1) +
                                      " differs in type: " +
                                      column_type_name(left.at(i).type) + " vs " +
                                      column_type_name(right.at(i).type);
                                break;
                            }
                        }
                    }
                    throw BindError(DiagCode::SetOpSchemaMismatch, msg);
                }
                return left;
            }
        }
        throw BindError(DiagCode::TypeMismatch, "unknown operation");
    }

    const Plan& plan_;
    const Catalog& catalog_;
    const EngineCapabilities& caps_;
    ValidationReport report_;
};

}  // namespace detail

// Walk steps in id order, inferring each step's output schema by the engine's
// typing rules and collecting diagnostics. All findings are diagnostics; the
// plan is executable iff none is an Error.
inline ValidationReport validate_plan(const Plan& plan, const Catalog& catalog,
                                      const EngineCapabilities& caps = {}) {
    return detail::PlanValidator(plan, catalog, caps).run();
}

}  // namespace spage
