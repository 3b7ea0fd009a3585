#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spage/plan_json.hpp"
#include "spage/table.hpp"

namespace spage {

// Prompt templates are versioned text assets; bump the version whenever the
// bytes change so cached completions and golden files stay honest.
inline constexpr const char* PLANNER_PROMPT_VERSION = "planner/v1";
inline constexpr const char* SQL_PROMPT_VERSION = "sql/v1";
inline constexpr const char* SUMMARY_PROMPT_VERSION = "summary/v1";

inline constexpr const char* PLANNER_INSTRUCTIONS =
    "You are a table reasoning planner. Convert the user query over the given tables into a\n"
    "structured plan: a JSON document {\"steps\": [...]} in which every step is an object\n"
    "{\"id\": <int>, \"operation\": <name>, \"source\": [<table name or \"Step<k>\">],\n"
    " \"condition\": <string or null>, \"output\": [<output expression>, ...]}.\n"
    "\n"
    "Operations:\n"
    "  Scan       read a table's rows, keeping those that satisfy the condition\n"
    "  Aggregate  group rows by the non-aggregate outputs and evaluate aggregate calls\n"
    "  Filter     keep the rows of an earlier result that satisfy the condition\n"
    "  Sort       order rows by the ORDER BY condition\n"
    "  TopSort    order rows and keep the first LIMIT rows\n"
    "  Join       combine two sources, pairing rows where the condition holds\n"
    "  Except     rows of the left source absent from the right (distinct)\n"
    "  Intersect  rows present in both sources (distinct)\n"
    "  Union      rows of either source (distinct)\n"
    "\n"
    "Rules:\n"
    "- Step ids are consecutive integers starting at 1.\n"
    "- SOURCE lists one table or earlier step for Scan/Aggregate/Filter/Sort/TopSort and\n"
    "  exactly two for Join/Except/Intersect/Union.\n"
    "- CONDITION is a row predicate such as Age > 40 or Step1.DeptID = Step2.DeptCode,\n"
    "  an ORDER BY clause for Sort/TopSort, or null.\n"
    "- OUTPUT names the produced columns; computed expressions take an alias, for example\n"
    "  \"(EndDate - StartDate) as Duration\". Set operations leave OUTPUT empty.\n"
    "- Use only column names that exist in the step's sources.\n"
    "- Exactly one step may be referenced by no later step; it produces the answer table.\n";

inline constexpr const char* SQL_INSTRUCTIONS =
    "Translate one structured plan step into a single SQL SELECT statement.\n"
    "- Quote column and table identifiers with double quotes.\n"
    "- Refer to earlier step results as step_<k> (unquoted).\n"
    "- Produce exactly the step's output columns, in order.\n"
    "Respond with the SQL statement only.\n";

inline constexpr const char* SUMMARY_INSTRUCTIONS =
    "Answer the user's query with a concise natural-language summary of the result table.\n"
    "Use only the rows shown. If the table has no rows, state that no matching records\n"
    "were found.\n";

// JSON document a SQL-generation prompt ends with; the step plus its source
// schemas is everything the translator needs.
inline std::string sql_request_document(const Step& step,
                                        const std::vector<Schema>& source_schemas) {
    nlohmann::ordered_json doc;
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
    doc["step"] = std::move(sj);
    doc["schemas"] = nlohmann::ordered_json::array();
    for (size_t i = 0; i < step.source.size(); ++i) {
        nlohmann::ordered_json entry;
        entry["source"] = step.source[i].to_string();
        entry["columns"] = nlohmann::ordered_json::array();
        for (const auto& col : source_schemas[i].columns())
            entry["columns"].push_back({col.name, column_type_name(col.type)});
        doc["schemas"].push_back(std::move(entry));
    }
    return doc.dump();
}

}  // namespace spage
