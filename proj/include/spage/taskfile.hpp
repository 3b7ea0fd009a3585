#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spage/llm.hpp"
#include "spage/plan_json.hpp"
#include "spage/table_io.hpp"

namespace spage {

// One benchmark record from a task file.
struct TaskRecord {
    std::string id;
    SummarizationTask task;
    std::optional<Plan> gold_plan;
};

namespace detail {

inline Table table_from_inline_spec(const nlohmann::ordered_json& spec) {
    if (!spec.contains("columns") || !spec["columns"].is_array())
        throw FormatError("inline table needs a 'columns' list of [name, type] pairs");
    std::vector<Column> cols;
    for (const auto& c : spec["columns"]) {
        if (!c.is_array() || c.size() != 2)
            throw FormatError("inline table columns must be [name, type] pairs");
        auto type = column_type_from_name(c.at(1).get<std::string>());
        if (!type) throw FormatError("unknown column type: " + c.at(1).get<std::string>());
        cols.push_back({c.at(0).get<std::string>(), *type});
    }
    Schema schema(std::move(cols));
    std::vector<Row> rows;
    for (const auto& rj : spec.value("rows", nlohmann::ordered_json::array())) {
        if (!rj.is_array() || rj.size() != schema.width())
            throw FormatError("inline table row width does not match columns");
        Row row;
        for (size_t c = 0; c < schema.width(); ++c) {
            const auto& cell = rj.at(c);
            ColumnType t = schema.at(c).type;
            if (cell.is_null()) {
                row.push_back(Value::null());
            } else if (t == ColumnType::Integer && cell.is_number_integer()) {
                row.push_back(Value::integer(cell.get<std::int64_t>()));
            } else if (t == ColumnType::Real && cell.is_number()) {
                row.push_back(Value::real(cell.get<double>()));
            } else if (t == ColumnType::Date && cell.is_string()) {
                auto d = Date::parse(cell.get<std::string>());
                if (!d) throw TypeError("bad date cell: " + cell.get<std::string>());
                row.push_back(Value::date(*d));
            } else if (t == ColumnType::Text && cell.is_string()) {
                row.push_back(Value::text(cell.get<std::string>()));
            } else {
                throw TypeError("cell does not conform to declared column type " +
                                std::string(column_type_name(t)));
            }
        }
        rows.push_back(std::move(row));
    }
    return Table(spec.at("name").get<std::string>(), std::move(schema), std::move(rows));
}

inline Table table_from_file_spec(const nlohmann::ordered_json& spec,
                                  const std::filesystem::path& base_dir) {
    std::filesystem::path path = spec.at("path").get<std::string>();
    if (path.is_relative()) path = base_dir / path;
    std::string format_name = spec.value("format", path.extension() == ".json"
                                                       ? std::string("json-rows")
                                                       : std::string("csv"));
    TableFormat format;
    if (format_name == "csv") format = TableFormat::Csv;
    else if (format_name == "json-rows") format = TableFormat::JsonRows;
    else throw FormatError("unknown table format: " + format_name);
    std::string name = spec.value("name", path.stem().string());
    TypeHints hints;
    if (spec.contains("types")) {
        for (auto it = spec["types"].begin(); it != spec["types"].end(); ++it) {
            auto type = column_type_from_name(it.value().get<std::string>());
            if (!type) throw FormatError("unknown column type: " + it.value().get<std::string>());
            hints[it.key()] = *type;
        }
    }
    return load_table(path.string(), format, name, hints);
}

}  // namespace detail

// Task files are JSON-lines: one record per line with keys
//   id (string), query (string), tables (list of file refs or inline tables),
//   reference_summary (optional), gold_plan (optional plan document).
// File refs resolve relative to the task file's directory.
inline std::vector<TaskRecord> load_taskfile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read task file: " + path);
    std::filesystem::path base_dir = std::filesystem::path(path).parent_path();
    std::vector<TaskRecord> records;
    std::set<std::string> seen_ids;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::ordered_json doc;
        try {
            doc = nlohmann::ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw FormatError("task file line " + std::to_string(line_no) + ": " + e.what());
        }
        TaskRecord record;
        record.id = doc.at("id").get<std::string>();
        if (!seen_ids.insert(record.id).second)
            throw DuplicateIdError("duplicate task id: " + record.id);
        record.task.query = doc.at("query").get<std::string>();
        if (record.task.query.empty()) throw FormatError("task " + record.id + ": empty query");
        if (!doc.contains("tables") || !doc["tables"].is_array() || doc["tables"].empty())
            throw FormatError("task " + record.id + ": needs a non-empty 'tables' list");
        for (const auto& spec : doc["tables"]) {
            if (spec.contains("path")) record.task.catalog.add(detail::table_from_file_spec(spec, base_dir));
            else record.task.catalog.add(detail::table_from_inline_spec(spec));
        }
        if (doc.contains("reference_summary") && !doc["reference_summary"].is_null())
            record.task.reference_summary = doc["reference_summary"].get<std::string>();
        if (doc.contains("gold_plan") && !doc["gold_plan"].is_null())
            record.gold_plan = parse_plan(doc["gold_plan"].dump());
        records.push_back(std::move(record));
    }
    if (records.empty()) throw FormatError("task file has no records: " + path);
    return records;
}

}  // namespace spage
