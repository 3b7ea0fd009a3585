#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spage/table.hpp"

namespace spage {

enum class TableFormat { Csv, JsonRows };

using TypeHints = std::map<std::string, ColumnType>;

namespace detail {

inline bool parse_integer_cell(const std::string& s, std::int64_t& out) {
    if (s.empty()) return false;
    size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (size_t j = i; j < s.size(); ++j) {
        if (!std::isdigit(static_cast<unsigned char>(s[j]))) return false;
    }
    errno = 0;
    char* end = nullptr;
    long long v = std::strtoll(s.c_str(), &end, 10);
    if (errno == ERANGE || end != s.c_str() + s.size()) return false;
    out = v;
    return true;
}

inline bool parse_real_cell(const std::string& s, double& out) {
    if (s.empty()) return false;
    size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    bool digit = false, dot = false, exp = false;
    for (size_t j = i; j < s.size(); ++j) {
        char c = s[j];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digit = true;
        } else if (c == '.' && !dot && !exp) {
            dot = true;
        } else if ((c == 'e' || c == 'E') && digit && !exp) {
            exp = true;
            if (j + 1 < s.size() && (s[j + 1] == '+' || s[j + 1] == '-')) ++j;
            if (j + 1 >= s.size()) return false;
        } else {
            return false;
        }
    }
    if (!digit) return false;
    errno = 0;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && errno != ERANGE;
}

inline bool cell_accepts(ColumnType t, const std::string& s) {
    switch (t) {
        case ColumnType::Integer: {
            std::int64_t v;
            return parse_integer_cell(s, v);
        }
        case ColumnType::Real: {
            double v;
            return parse_real_cell(s, v);
        }
        case ColumnType::Date:
            return Date::parse(s).has_value();
        case ColumnType::Text:
            return true;
    }
    return false;
}

inline Value cell_to_value(ColumnType t, const std::string& s) {
    if (s.empty()) return Value::null();
    switch (t) {
        case ColumnType::Integer: {
            std::int64_t v;
            if (!parse_integer_cell(s, v)) throw TypeError("cell '" + s + "' is not an Integer");
            return Value::integer(v);
        }
        case ColumnType::Real: {
            double v;
            if (!parse_real_cell(s, v)) throw TypeError("cell '" + s + "' is not a Real");
            return Value::real(v);
        }
        case ColumnType::Date: {
            auto d = Date::parse(s);
            if (!d) throw TypeError("cell '" + s + "' is not an ISO-8601 date");
            return Value::date(*d);
        }
        case ColumnType::Text:
            return Value::text(s);
    }
    return Value::null();
}

// Narrowest of Integer -> Real -> Date -> Text that accepts every non-empty
// cell in the column. All cells empty falls through to Integer.
inline ColumnType infer_column_type(const std::vector<std::vector<std::string>>& rows, size_t col) {
    for (ColumnType t : {ColumnType::Integer, ColumnType::Real, ColumnType::Date}) {
        bool ok = true;
        for (const auto& row : rows) {
            const std::string& s = row[col];
            if (!s.empty() && !cell_accepts(t, s)) {
                ok = false;
                break;
            }
        }
        if (ok) return t;
    }
    return ColumnType::Text;
}

// RFC-4180 reader: quoted fields, doubled-quote escapes, embedded commas
// and newlines, CRLF or LF line endings.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    size_t i = 0;
    auto end_field = [&] {
        record.push_back(field);
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(record);
        record.clear();
    };
    while (i < text.size()) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                } else {
                    in_quotes = false;
                    ++i;
                }
            } else {
                field += c;
                ++i;
            }
        } else if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
            ++i;
        } else if (c == ',') {
            end_field();
            ++i;
        } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
            end_record();
            i += 2;
        } else if (c == '\n') {
            end_record();
            ++i;
        } else {
            field += c;
            field_started = true;
            ++i;
        }
    }
    if (in_quotes) throw FormatError("unterminated quoted CSV field");
    if (field_started || !field.empty() || !record.empty()) end_record();
    return records;
}

inline std::string csv_quote(const std::string& s) {
    bool need = s.find_first_of(",\"\r\n") != std::string::npos;
    if (!need) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Table table_from_string_grid(const std::string& name,
                                    const std::vector<std::string>& header,
                                    const std::vector<std::vector<std::string>>& rows,
                                    const TypeHints& hints) {
    if (header.empty()) throw FormatError("table has no columns");
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw FormatError("ragged row: expected " + std::to_string(header.size()) +
                              " fields, got " + std::to_string(row.size()));
    }
    std::vector<Column> cols;
    cols.reserve(header.size());
    for (size_t c = 0; c < header.size(); ++c) {
        ColumnType t;
        auto hit = hints.end();
        for (auto it = hints.begin(); it != hints.end(); ++it) {
            if (iequals(it->first, header[c])) {
                hit = it;
                break;
            }
        }
        if (hit != hints.end()) t = hit->second;
        else t = infer_column_type(rows, c);
        cols.push_back({header[c], t});
    }
    Schema schema;
    try {
        schema = Schema(std::move(cols));
    } catch (const StructureError& e) {
        throw FormatError(e.what());
    }
    std::vector<Row> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        Row r;
        r.reserve(row.size());
        for (size_t c = 0; c < row.size(); ++c) r.push_back(cell_to_value(schema.at(c).type, row[c]));
        out.push_back(std::move(r));
    }
    return Table(name, std::move(schema), std::move(out));
}

}  // namespace detail

inline Table load_table_from_csv_text(const std::string& text, const std::string& name,
                                      const TypeHints& hints = {}) {
    auto records = detail::parse_csv(text);
    if (records.empty()) throw FormatError("empty CSV: no header row");
    std::vector<std::vector<std::string>> rows(records.begin() + 1, records.end());
    return detail::table_from_string_grid(name, records[0], rows, hints);
}

// JSON-rows: either {"columns": [...names...], "rows": [{...}, ...]} or a
// bare array of row objects (column order from the first object's keys).
// Missing keys become Null; unknown keys are a FormatError.
inline Table load_table_from_json_text(const std::string& text, const std::string& name,
                                       const TypeHints& hints = {}) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("invalid JSON: ") + e.what());
    }
    std::vector<std::string> columns;
    nlohmann::ordered_json rows_json;
    if (doc.is_object()) {
        if (!doc.contains("rows") || !doc["rows"].is_array())
            throw FormatError("json-rows object needs a 'rows' array");
        rows_json = doc["rows"];
        if (doc.contains("columns")) {
            for (const auto& c : doc["columns"]) {
                if (!c.is_string()) throw FormatError("'columns' entries must be strings");
                columns.push_back(c.get<std::string>());
            }
        }
    } else if (doc.is_array()) {
        rows_json = doc;
    } else {
        throw FormatError("json-rows document must be an object or an array");
    }
    if (columns.empty()) {
        if (rows_json.empty()) throw FormatError("json-rows without 'columns' needs at least one row");
        if (!rows_json[0].is_object()) throw FormatError("json-rows rows must be objects");
        for (auto it = rows_json[0].begin(); it != rows_json[0].end(); ++it)
            columns.push_back(it.key());
    }
    if (columns.empty()) throw FormatError("table has no columns");

    // Convert each cell into a string grid so the same inference path
    // applies; JSON numbers print deterministically.
    std::vector<std::vector<std::string>> grid;
    for (const auto& row : rows_json) {
        if (!row.is_object()) throw FormatError("json-rows rows must be objects");
        for (auto it = row.begin(); it != row.end(); ++it) {
            bool known = false;
            for (const auto& c : columns)
                if (iequals(c, it.key())) known = true;
            if (!known) throw FormatError("row has unknown column: " + it.key());
        }
        std::vector<std::string> cells;
        for (const auto& col : columns) {
            if (!row.contains(col) || row[col].is_null()) {
                cells.emplace_back();
            } else if (row[col].is_string()) {
                cells.push_back(row[col].get<std::string>());
            } else if (row[col].is_number_integer()) {
                cells.push_back(std::to_string(row[col].get<std::int64_t>()));
            } else if (row[col].is_number_float()) {
                cells.push_back(format_real(row[col].get<double>()));
            } else {
                throw FormatError("unsupported cell value in column '" + col +
                                  "' (nested or boolean values are rejected)");
            }
        }
        grid.push_back(std::move(cells));
    }
    return detail::table_from_string_grid(name, columns, grid, hints);
}

inline Table load_table(const std::string& path, TableFormat format, const std::string& name,
                        const TypeHints& hints = {}) {
    std::string text = detail::read_file(path);
    switch (format) {
        case TableFormat::Csv: return load_table_from_csv_text(text, name, hints);
        case TableFormat::JsonRows: return load_table_from_json_text(text, name, hints);
    }
    throw FormatError("unknown table format");
}

inline std::string table_to_csv(const Table& table) {
    std::string out;
    for (size_t c = 0; c < table.schema().width(); ++c) {
        if (c) out += ",";
        out += detail::csv_quote(table.schema().at(c).name);
    }
    out += "\n";
    for (const Row& row : table.rows()) {
        for (size_t c = 0; c < row.size(); ++c) {
            if (c) out += ",";
            out += detail::csv_quote(row[c].to_display());
        }
        out += "\n";
    }
    return out;
}

inline std::string table_to_json(const Table& table) {
    nlohmann::ordered_json doc;
    doc["columns"] = nlohmann::ordered_json::array();
    for (const auto& col : table.schema().columns()) doc["columns"].push_back(col.name);
    doc["rows"] = nlohmann::ordered_json::array();
    for (const Row& row : table.rows()) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (size_t c = 0; c < row.size(); ++c) {
            const auto& name = table.schema().at(c).name;
            const Value& v = row[c];
            if (v.is_null()) obj[name] = nullptr;
            else if (v.is_integer()) obj[name] = v.as_integer();
            else if (v.is_real()) obj[name] = v.as_real();
            else obj[name] = v.to_display();
        }
        doc["rows"].push_back(std::move(obj));
    }
    return doc.dump(2) + "\n";
}

inline std::string serialize_table(const Table& table, TableFormat format) {
    return format == TableFormat::Csv ? table_to_csv(table) : table_to_json(table);
}

// Load every *.csv / *.json file in a directory (or a single file) into a
// catalog; table names come from file stems.
inline Catalog load_catalog(const std::string& path) {
    namespace fs = std::filesystem;
    Catalog catalog;
    auto load_one = [&](const fs::path& p) {
        auto ext = p.extension().string();
        if (ext == ".csv")
            catalog.add(load_table(p.string(), TableFormat::Csv, p.stem().string()));
        else if (ext == ".json")
            catalog.add(load_table(p.string(), TableFormat::JsonRows, p.stem().string()));
    };
    fs::path p(path);
    if (fs::is_directory(p)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(p))
            if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) load_one(f);
    } else if (fs::is_regular_file(p)) {
        load_one(p);
    } else {
        throw IoError("no such file or directory: " + path);
    }
    if (catalog.empty()) throw IoError("no tables found under: " + path);
    return catalog;
}

}  // namespace spage
