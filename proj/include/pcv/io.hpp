#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcv/schema.hpp"

namespace pcv {

// Shortest representation that reads back bit-identically.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline bool needs_quoting(const std::string& s) {
    return s.find_first_of(",\"\n\r") != std::string::npos;
}

inline void write_field(std::ostream& os, const std::string& s) {
    if (!needs_quoting(s)) {
        os << s;
        return;
    }
    os << '"';
    for (char c : s) {
        if (c == '"') os << '"';
        os << c;
    }
    os << '"';
}

}  // namespace detail

// RFC-style CSV: quoted fields may contain commas, quotes (doubled) and
// newlines; a header row is required.
inline Table read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();

    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    long line = 1;
    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
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
                field += c;
                if (c == '\n') ++line;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field.empty() && !field_started) {
                    in_quotes = true;
                    field_started = true;
                } else {
                    throw ParseError(line, static_cast<long>(record.size()) + 1,
                                     "stray quote inside unquoted field");
                }
                break;
            case ',': end_field(); break;
            case '\r': break;
            case '\n':
                end_record();
                ++line;
                break;
            default:
                field += c;
                field_started = true;
        }
    }
    if (in_quotes) throw ParseError(line, static_cast<long>(record.size()) + 1, "unterminated quote");
    if (field_started || !field.empty() || !record.empty()) end_record();

    if (records.empty()) throw ParseError(1, 1, "empty file");
    Table t;
    t.columns = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != t.columns.size())
            throw ParseError(static_cast<long>(r + 1), 1,
                             "row has " + std::to_string(records[r].size()) + " fields, header has " +
                                 std::to_string(t.columns.size()));
        t.rows.push_back(std::move(records[r]));
    }
    if (t.rows.empty()) throw ParseError(2, 1, "no data rows");
    return t;
}

// Reads a CSV and pairs it with its schema: loaded from schema_path when
// given, inferred from the data otherwise. Cells are validated against the
// schema (numeric cells must parse, row order is preserved).
inline std::pair<Table, DatasetSchema> read_dataset(const std::string& path,
                                                    const std::string& schema_path = "") {
    Table t = read_csv(path);
    DatasetSchema schema;
    if (schema_path.empty()) {
        schema = DatasetSchema::infer(t);
    } else {
        std::ifstream in(schema_path);
        if (!in) throw IoError("cannot open schema '" + schema_path + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw SchemaMismatch("invalid schema json: " + std::string(e.what()));
        }
        schema = DatasetSchema::from_json(j);
        if (static_cast<long>(schema.columns.size()) != t.n_cols())
            throw SchemaMismatch("schema has " + std::to_string(schema.columns.size()) +
                                 " columns, csv has " + std::to_string(t.n_cols()));
        for (long j2 = 0; j2 < t.n_cols(); ++j2)
            if (schema.columns[static_cast<std::size_t>(j2)].name !=
                t.columns[static_cast<std::size_t>(j2)])
                throw SchemaMismatch("csv column '" + t.columns[static_cast<std::size_t>(j2)] +
                                     "' does not match schema column '" +
                                     schema.columns[static_cast<std::size_t>(j2)].name + "'");
    }
    // type check per schema
    for (std::size_t j = 0; j < schema.columns.size(); ++j) {
        const auto& spec = schema.columns[j];
        if (spec.kind != ColumnKind::numeric) continue;
        for (long i = 0; i < t.n_rows(); ++i)
            if (!parse_double(t.rows[static_cast<std::size_t>(i)][j]))
                throw ParseError(i + 2, static_cast<long>(j) + 1,
                                 "cell does not parse as a finite number");
    }
    return {std::move(t), std::move(schema)};
}

inline void write_csv(const Table& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    for (std::size_t j = 0; j < t.columns.size(); ++j) {
        if (j) out << ',';
        detail::write_field(out, t.columns[j]);
    }
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out << ',';
            detail::write_field(out, row[j]);
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

inline void write_matrix_csv(const Matrix& m, const std::vector<std::string>& header,
                             const std::string& path) {
    if (static_cast<Index>(header.size()) != m.cols())
        throw ShapeMismatch("header size does not match matrix columns");
    Table t;
    t.columns = header;
    t.rows.resize(static_cast<std::size_t>(m.rows()));
    for (Index i = 0; i < m.rows(); ++i) {
        auto& row = t.rows[static_cast<std::size_t>(i)];
        row.resize(static_cast<std::size_t>(m.cols()));
        for (Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = format_double(m(i, j));
    }
    write_csv(t, path);
}

// Generation metadata travels in a sibling json file next to the csv.
inline std::string sidecar_path(const std::string& csv_path) { return csv_path + ".meta.json"; }

inline void write_sidecar(const std::string& csv_path, const nlohmann::json& meta) {
    const std::string path = sidecar_path(csv_path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << meta.dump(2) << '\n';
    if (!out) throw IoError("write failed for '" + path + "'");
}

inline nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("invalid json in '" + path + "': " + std::string(e.what()));
    }
    return j;
}

}  // namespace pcv
