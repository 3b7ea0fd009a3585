#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "spage/expr_parser.hpp"
#include "spage/plan.hpp"

namespace spage {

namespace detail {

inline std::pair<int, int> line_col_of_offset(const std::string& text, size_t offset) {
    int line = 1, col = 1;
    for (size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace detail

// Parse the canonical plan file: a JSON document
//   {"steps": [{"id": 1, "operation": "Scan", "source": ["T"],
//               "condition": "x > 1" | null, "output": ["a", "b + 1 as c"]}, ...]}
// Any deviation is an error, never a guess.
inline Plan parse_plan(const std::string& text) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        auto [line, col] = detail::line_col_of_offset(text, e.byte > 0 ? e.byte - 1 : 0);
        throw SyntaxError(line, col, "valid JSON", e.what());
    }
    if (!doc.is_object() || !doc.contains("steps") || !doc["steps"].is_array())
        throw StructureError("plan document must be an object with a 'steps' array");
    Plan plan;
    for (const auto& sj : doc["steps"]) {
        if (!sj.is_object()) throw StructureError("each step must be an object");
        Step step;
        if (!sj.contains("id") || !sj["id"].is_number_integer())
            throw StructureError("step is missing an integer 'id'");
        step.id = sj["id"].get<int>();
        const std::string where = "step " + std::to_string(step.id);
        if (!sj.contains("operation") || !sj["operation"].is_string())
            throw StructureError(where + ": missing 'operation'");
        auto op = operation_from_name(sj["operation"].get<std::string>());
        if (!op)
            throw StructureError(where + ": unknown operation '" +
                                 sj["operation"].get<std::string>() + "'");
        step.operation = *op;
        if (!sj.contains("source") || !sj["source"].is_array())
            throw StructureError(where + ": missing 'source' list");
        for (const auto& src : sj["source"]) {
            if (!src.is_string()) throw StructureError(where + ": sources must be strings");
            step.source.push_back(SourceRef::parse(src.get<std::string>()));
        }
        if (sj.contains("condition") && !sj["condition"].is_null()) {
            if (!sj["condition"].is_string())
                throw StructureError(where + ": condition must be a string or null");
            const std::string cond = sj["condition"].get<std::string>();
            try {
                if (is_sort_operation(step.operation)) step.sort = parse_sort_spec(cond);
                else step.predicate = parse_predicate(cond);
            } catch (const SyntaxError& e) {
                throw SyntaxError(e.line(), e.col(), e.expected(),
                                  where + " condition: " + e.what());
            }
        }
        if (!sj.contains("output") || !sj["output"].is_array())
            throw StructureError(where + ": missing 'output' list");
        for (const auto& out : sj["output"]) {
            if (!out.is_string()) throw StructureError(where + ": outputs must be strings");
            try {
                step.output.push_back(parse_output_expr(out.get<std::string>()));
            } catch (const SyntaxError& e) {
                throw SyntaxError(e.line(), e.col(), e.expected(), where + " output: " + e.what());
            }
        }
        plan.steps.push_back(std::move(step));
    }
    plan.validate_structure();
    return plan;
}

// Canonical text form; parse_plan(serialize_plan(p)) is structurally equal
// to p.
inline std::string serialize_plan(const Plan& plan) {
    nlohmann::ordered_json doc;
    doc["steps"] = nlohmann::ordered_json::array();
    for (const auto& step : plan.steps) {
        nlohmann::ordered_json sj;
        sj["id"] = step.id;
        sj["operation"] = operation_name(step.operation);
        sj["source"] = nlohmann::ordered_json::array();
        for (const auto& src : step.source) sj["source"].push_back(src.to_string());
        if (step.sort) sj["condition"] = sort_spec_to_string(*step.sort);
        else if (step.predicate && !step.predicate->is_true())
            sj["condition"] = predicate_to_string(step.predicate);
        else sj["condition"] = nullptr;
        sj["output"] = nlohmann::ordered_json::array();
        for (const auto& out : step.output) sj["output"].push_back(output_column_to_string(out));
        doc["steps"].push_back(std::move(sj));
    }
    return doc.dump(2) + "\n";
}

}  // namespace spage
