#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "errors.hpp"

namespace stabsel::csv {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format(double v) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Locale-independent parse of a full cell; accepts scientific notation.
inline std::optional<double> parse_double(std::string_view cell) {
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    if (cell.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) return std::nullopt;
    return v;
}

/// Quotes a field when it contains a delimiter, quote or line break.
inline std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

struct Record {
    std::vector<std::string> fields;
    std::size_t line = 0; // 1-based line where the record starts
};

/// RFC-4180 reader: quoted fields, doubled quotes, CRLF or LF endings.
/// Blank lines are skipped.
inline std::vector<Record> parse(std::string_view text) {
    std::vector<Record> records;
    Record current;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    current.line = 1;

    auto end_field = [&] {
        current.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        if (!(current.fields.empty() && !field_started && field.empty())) {
            end_field();
            records.push_back(std::move(current));
        }
        current = Record{};
        current.line = line;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        switch (c) {
        case '"':
            in_quotes = true;
            field_started = true;
            break;
        case ',':
            end_field();
            field_started = true;
            break;
        case '\r':
            if (i + 1 < text.size() && text[i + 1] == '\n') break;
            [[fallthrough]];
        case '\n':
            ++line;
            end_record();
            break;
        default:
            field += c;
            field_started = true;
        }
    }
    if (in_quotes) throw IngestionError("unterminated quoted field starting on line " + std::to_string(current.line));
    end_record();
    return records;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestionError("cannot open file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IngestionError("cannot write file '" + path + "'");
    out << contents;
    if (!out) throw IngestionError("error writing file '" + path + "'");
}

} // namespace stabsel::csv
