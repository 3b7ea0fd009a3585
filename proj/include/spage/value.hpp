#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <variant>

#include "spage/errors.hpp"

namespace spage {

enum class ColumnType { Integer, Real, Text, Date };

inline const char* column_type_name(ColumnType t) {
    switch (t) {
        case ColumnType::Integer: return "Integer";
        case ColumnType::Real: return "Real";
        case ColumnType::Text: return "Text";
        case ColumnType::Date: return "Date";
    }
    return "?";
}

inline std::optional<ColumnType> column_type_from_name(const std::string& s) {
    if (s == "Integer") return ColumnType::Integer;
    if (s == "Real") return ColumnType::Real;
    if (s == "Text") return ColumnType::Text;
    if (s == "Date") return ColumnType::Date;
    return std::nullopt;
}

// Calendar date, stored as days since 1970-01-01. Round-trips through
// ISO-8601 `YYYY-MM-DD` text without loss.
struct Date {
    std::int32_t days = 0;

    friend bool operator==(const Date&, const Date&) = default;
    friend auto operator<=>(const Date&, const Date&) = default;

    static std::optional<Date> parse(const std::string& s) {
        if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
        for (int i : {0, 1, 2, 3, 5, 6, 8, 9}) {
            if (s[i] < '0' || s[i] > '9') return std::nullopt;
        }
        int y = std::atoi(s.substr(0, 4).c_str());
        int m = std::atoi(s.substr(5, 2).c_str());
        int d = std::atoi(s.substr(8, 2).c_str());
        std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                        std::chrono::day{unsigned(d)}};
        if (!ymd.ok()) return std::nullopt;
        auto ct = std::chrono::sys_days(ymd).time_since_epoch().count();
        return Date{static_cast<std::int32_t>(ct)};
    }

    std::string to_string() const {
        std::chrono::sys_days sd{std::chrono::days{days}};
        std::chrono::year_month_day ymd{sd};
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", int(ymd.year()),
                      unsigned(ymd.month()), unsigned(ymd.day()));
        return buf;
    }
};

// Shortest round-trip decimal for a double. Guarantees the result re-parses
// as Real, never Integer (a '.' or exponent is always present).
inline std::string format_real(double x) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf) - 3, x);
    std::string s(buf, res.ptr);
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
        s += ".0";
    }
    return s;
}

// One table cell: exactly one of Null, Integer, Real, Text, Date.
class Value {
public:
    Value() : v_(std::monostate{}) {}
    static Value null() { return Value(); }
    static Value integer(std::int64_t i) { return Value(Repr{i}); }
    static Value real(double d) { return Value(Repr{d}); }
    static Value text(std::string s) { return Value(Repr{std::move(s)}); }
    static Value date(Date d) { return Value(Repr{d}); }

    bool is_null() const { return std::holds_alternative<std::monostate>(v_); }
    bool is_integer() const { return std::holds_alternative<std::int64_t>(v_); }
    bool is_real() const { return std::holds_alternative<double>(v_); }
    bool is_text() const { return std::holds_alternative<std::string>(v_); }
    bool is_date() const { return std::holds_alternative<Date>(v_); }
    bool is_numeric() const { return is_integer() || is_real(); }

    std::int64_t as_integer() const { return std::get<std::int64_t>(v_); }
    double as_real() const { return std::get<double>(v_); }
    const std::string& as_text() const { return std::get<std::string>(v_); }
    Date as_date() const { return std::get<Date>(v_); }

    double numeric() const { return is_integer() ? double(as_integer()) : as_real(); }

    std::optional<ColumnType> type() const {
        if (is_integer()) return ColumnType::Integer;
        if (is_real()) return ColumnType::Real;
        if (is_text()) return ColumnType::Text;
        if (is_date()) return ColumnType::Date;
        return std::nullopt;
    }

    bool conforms_to(ColumnType t) const { return is_null() || type() == t; }

    // Display text. Null renders as empty string, Dates as ISO-8601, Reals
    // with the shortest round-trip decimal.
    std::string to_display() const {
        if (is_null()) return "";
        if (is_integer()) return std::to_string(as_integer());
        if (is_real()) return format_real(as_real());
        if (is_date()) return as_date().to_string();
        return as_text();
    }

    // Exact structural equality (no numeric widening); used for AST and
    // table identity checks.
    friend bool operator==(const Value& a, const Value& b) { return a.v_ == b.v_; }

private:
    using Repr = std::variant<std::monostate, std::int64_t, double, std::string, Date>;
    explicit Value(Repr v) : v_(std::move(v)) {}
    Repr v_;
};

enum class Ordering { Less, Equal, Greater, Incomparable };

// Total preorder within one type kind. Numerics compare with Integer widened
// to Real, Text by codepoint sequence (UTF-8 byte order), Dates
// chronologically. Null against anything and cross-kind pairs are
// Incomparable.
inline Ordering compare_values(const Value& a, const Value& b) {
    if (a.is_null() || b.is_null()) return Ordering::Incomparable;
    if (a.is_numeric() && b.is_numeric()) {
        if (a.is_integer() && b.is_integer()) {
            auto x = a.as_integer(), y = b.as_integer();
            if (x < y) return Ordering::Less;
            if (x > y) return Ordering::Greater;
            return Ordering::Equal;
        }
        double x = a.numeric(), y = b.numeric();
        if (x < y) return Ordering::Less;
        if (x > y) return Ordering::Greater;
        if (x == y) return Ordering::Equal;
        return Ordering::Incomparable;  // NaN operand
    }
    if (a.is_text() && b.is_text()) {
        int c = a.as_text().compare(b.as_text());
        return c < 0 ? Ordering::Less : c > 0 ? Ordering::Greater : Ordering::Equal;
    }
    if (a.is_date() && b.is_date()) {
        if (a.as_date().days < b.as_date().days) return Ordering::Less;
        if (a.as_date().days > b.as_date().days) return Ordering::Greater;
        return Ordering::Equal;
    }
    return Ordering::Incomparable;
}

}  // namespace spage
