#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "spage/errors.hpp"
#include "spage/value.hpp"

namespace spage {

inline std::string to_lower_ascii(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

inline bool iequals(const std::string& a, const std::string& b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
               return std::tolower(x) == std::tolower(y);
           });
}

// letters/digits/underscore, not starting with a digit
inline bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (std::isdigit(static_cast<unsigned char>(s[0]))) return false;
    for (unsigned char c : s) {
        if (!std::isalnum(c) && c != '_') return false;
    }
    return true;
}

struct Column {
    std::string name;
    ColumnType type = ColumnType::Text;

    friend bool operator==(const Column&, const Column&) = default;
};

// Ordered list of named, typed columns. Names are unique case-insensitively
// and there is at least one column.
class Schema {
public:
    Schema() = default;
    explicit Schema(std::vector<Column> columns) : columns_(std::move(columns)) {
        if (columns_.empty()) throw StructureError("schema must have at least one column");
        for (size_t i = 0; i < columns_.size(); ++i) {
            if (!is_identifier(columns_[i].name))
                throw FormatError("column name is not a valid identifier: '" + columns_[i].name + "'");
            for (size_t j = i + 1; j < columns_.size(); ++j) {
                if (iequals(columns_[i].name, columns_[j].name))
                    throw StructureError("duplicate column name: " + columns_[j].name);
            }
        }
    }

    const std::vector<Column>& columns() const { return columns_; }
    size_t width() const { return columns_.size(); }
    const Column& at(size_t i) const { return columns_.at(i); }

    std::optional<size_t> index_of(const std::string& name) const {
        for (size_t i = 0; i < columns_.size(); ++i) {
            if (iequals(columns_[i].name, name)) return i;
        }
        return std::nullopt;
    }

    friend bool operator==(const Schema&, const Schema&) = default;

    // Same arity and per-column types; names may differ. Used by set ops.
    bool type_compatible_with(const Schema& other) const {
        if (width() != other.width()) return false;
        for (size_t i = 0; i < width(); ++i) {
            if (columns_[i].type != other.columns_[i].type) return false;
        }
        return true;
    }

private:
    std::vector<Column> columns_;
};

using Row = std::vector<Value>;

// Named relation: schema plus ordered rows. Immutable by convention after
// construction; the engine shares tables across threads freely.
class Table {
public:
    Table() = default;
    Table(std::string name, Schema schema, std::vector<Row> rows = {})
        : name_(std::move(name)), schema_(std::move(schema)), rows_(std::move(rows)) {
        check_rows();
    }

    const std::string& name() const { return name_; }
    const Schema& schema() const { return schema_; }
    const std::vector<Row>& rows() const { return rows_; }
    size_t row_count() const { return rows_.size(); }

    void append_row(Row row) {
        check_row(row, rows_.size());
        rows_.push_back(std::move(row));
    }

    bool value_equal(const Table& other) const {
        return schema_ == other.schema_ && rows_ == other.rows_;
    }

private:
    void check_rows() const {
        for (size_t i = 0; i < rows_.size(); ++i) check_row(rows_[i], i);
    }
    void check_row(const Row& row, size_t idx) const {
        if (row.size() != schema_.width())
            throw StructureError("row " + std::to_string(idx + 1) + " has width " +
                                 std::to_string(row.size()) + ", expected " +
                                 std::to_string(schema_.width()));
        for (size_t c = 0; c < row.size(); ++c) {
            if (!row[c].conforms_to(schema_.at(c).type))
                throw TypeError("cell (" + std::to_string(idx + 1) + "," +
                                std::to_string(c + 1) + ") does not conform to column type " +
                                column_type_name(schema_.at(c).type));
        }
    }

    std::string name_;
    Schema schema_;
    std::vector<Row> rows_;
};

using TablePtr = std::shared_ptr<const Table>;

// name -> Table, unique case-insensitively, deterministic iteration order.
class Catalog {
public:
    void add(Table table) {
        auto key = to_lower_ascii(table.name());
        if (tables_.count(key)) throw DuplicateIdError("duplicate table name: " + table.name());
        order_.push_back(key);
        tables_.emplace(key, std::make_shared<Table>(std::move(table)));
    }

    void add(TablePtr table) {
        auto key = to_lower_ascii(table->name());
        if (tables_.count(key)) throw DuplicateIdError("duplicate table name: " + table->name());
        order_.push_back(key);
        tables_.emplace(key, std::move(table));
    }

    TablePtr find(const std::string& name) const {
        auto it = tables_.find(to_lower_ascii(name));
        return it == tables_.end() ? nullptr : it->second;
    }

    bool empty() const { return tables_.empty(); }
    size_t size() const { return tables_.size(); }

    std::vector<TablePtr> tables() const {
        std::vector<TablePtr> out;
        out.reserve(order_.size());
        for (const auto& k : order_) out.push_back(tables_.at(k));
        return out;
    }

private:
    std::vector<std::string> order_;
    std::map<std::string, TablePtr> tables_;
};

// Flatten a table into prompt text:
//   table name: <name>
//   col: h1 | h2 | ... | hn
//   row i: c_i1 | ... | c_in     (for i in 1..min(k_rows, row count))
inline std::string linearize(const Table& table, size_t k_rows) {
    if (k_rows < 1) throw StructureError("k_rows must be >= 1");
    std::string out = "table name: " + table.name() + "\n";
    out += "col: ";
    for (size_t i = 0; i < table.schema().width(); ++i) {
        if (i) out += " | ";
        out += table.schema().at(i).name;
    }
    out += "\n";
    size_t n = std::min(k_rows, table.row_count());
    for (size_t r = 0; r < n; ++r) {
        out += "row " + std::to_string(r + 1) + ": ";
        const Row& row = table.rows()[r];
        for (size_t c = 0; c < row.size(); ++c) {
            if (c) out += " | ";
            out += row[c].to_display();
        }
        out += "\n";
    }
    return out;
}

}  // namespace spage
