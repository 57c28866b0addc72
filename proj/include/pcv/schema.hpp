#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcv/matrix.hpp"

namespace pcv {

// Raw tabular data: header plus string cells. Typing happens against a
// DatasetSchema when encoding.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    long n_rows() const { return static_cast<long>(rows.size()); }
    long n_cols() const { return static_cast<long>(columns.size()); }
};

enum class ColumnKind { numeric, categorical };
enum class ColumnRole { predictor, response, class_label };

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    ColumnRole role = ColumnRole::predictor;
    std::vector<std::string> levels;  // categorical only, declared order; first = reference
};

inline std::optional<double> parse_double(const std::string& s) {
    const char* b = s.data();
    const char* e = b + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t')) --e;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(b, e, value);
    if (ec != std::errc() || ptr != e || b == e) return std::nullopt;
    if (!std::isfinite(value)) return std::nullopt;
    return value;
}

struct DatasetSchema {
    std::vector<ColumnSpec> columns;

    void validate() const {
        int responses = 0, classes = 0;
        for (const auto& c : columns) {
            if (c.name.empty()) throw SchemaMismatch("column with empty name");
            if (c.kind == ColumnKind::categorical) {
                if (c.levels.empty())
                    throw SchemaMismatch("categorical column '" + c.name + "' declares no levels");
                for (std::size_t i = 0; i < c.levels.size(); ++i) {
                    if (c.levels[i].empty())
                        throw SchemaMismatch("empty level in column '" + c.name + "'");
                    for (std::size_t k = i + 1; k < c.levels.size(); ++k)
                        if (c.levels[i] == c.levels[k])
                            throw SchemaMismatch("duplicate level '" + c.levels[i] +
                                                 "' in column '" + c.name + "'");
                }
            }
            if (c.role == ColumnRole::response) {
                if (c.kind != ColumnKind::numeric)
                    throw SchemaMismatch("response column '" + c.name + "' must be numeric");
                ++responses;
            }
            if (c.role == ColumnRole::class_label) {
                if (c.kind != ColumnKind::categorical)
                    throw SchemaMismatch("class column '" + c.name + "' must be categorical");
                ++classes;
            }
        }
        if (responses + classes > 1)
            throw SchemaMismatch("at most one response or class column is allowed");
    }

    int response_index() const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i].role == ColumnRole::response) return static_cast<int>(i);
        return -1;
    }

    int class_index() const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i].role == ColumnRole::class_label) return static_cast<int>(i);
        return -1;
    }

    // Predictor width after dummy expansion: numeric count + sum of (L-1).
    long predictor_columns() const {
        long n = 0;
        for (const auto& c : columns) {
            if (c.role != ColumnRole::predictor) continue;
            n += c.kind == ColumnKind::numeric ? 1 : static_cast<long>(c.levels.size()) - 1;
        }
        return n;
    }

    // Numeric if every cell parses as a number, otherwise categorical with
    // the observed levels sorted. All columns become predictors.
    static DatasetSchema infer(const Table& t) {
        DatasetSchema s;
        for (long j = 0; j < t.n_cols(); ++j) {
            ColumnSpec spec;
            spec.name = t.columns[static_cast<std::size_t>(j)];
            bool numeric = true;
            for (const auto& row : t.rows)
                if (!parse_double(row[static_cast<std::size_t>(j)])) {
                    numeric = false;
                    break;
                }
            if (numeric) {
                spec.kind = ColumnKind::numeric;
            } else {
                spec.kind = ColumnKind::categorical;
                for (const auto& row : t.rows) {
                    const auto& v = row[static_cast<std::size_t>(j)];
                    bool seen = false;
                    for (const auto& l : spec.levels) seen = seen || l == v;
                    if (!seen) spec.levels.push_back(v);
                }
                std::sort(spec.levels.begin(), spec.levels.end());
            }
            s.columns.push_back(std::move(spec));
        }
        s.validate();
        return s;
    }

    static DatasetSchema from_json(const nlohmann::json& j) {
        DatasetSchema s;
        if (!j.contains("columns") || !j["columns"].is_array())
            throw SchemaMismatch("schema json needs a 'columns' array");
        for (const auto& c : j["columns"]) {
            ColumnSpec spec;
            spec.name = c.at("name").get<std::string>();
            const std::string kind = c.value("kind", std::string("numeric"));
            if (kind == "numeric")
                spec.kind = ColumnKind::numeric;
            else if (kind == "categorical")
                spec.kind = ColumnKind::categorical;
            else
                throw SchemaMismatch("unknown kind '" + kind + "' in column '" + spec.name + "'");
            const std::string role = c.value("role", std::string("predictor"));
            if (role == "predictor")
                spec.role = ColumnRole::predictor;
            else if (role == "response")
                spec.role = ColumnRole::response;
            else if (role == "class")
                spec.role = ColumnRole::class_label;
            else
                throw SchemaMismatch("unknown role '" + role + "' in column '" + spec.name + "'");
            if (c.contains("levels")) spec.levels = c["levels"].get<std::vector<std::string>>();
            s.columns.push_back(std::move(spec));
        }
        s.validate();
        return s;
    }

    nlohmann::json to_json() const {
        nlohmann::json cols = nlohmann::json::array();
        for (const auto& c : columns) {
            nlohmann::json jc;
            jc["name"] = c.name;
            jc["kind"] = c.kind == ColumnKind::numeric ? "numeric" : "categorical";
            jc["role"] = c.role == ColumnRole::predictor
                             ? "predictor"
                             : (c.role == ColumnRole::response ? "response" : "class");
            if (c.kind == ColumnKind::categorical) jc["levels"] = c.levels;
            cols.push_back(jc);
        }
        return nlohmann::json{{"columns", cols}};
    }
};

// One encoded predictor column: either a numeric passthrough or one dummy
// indicator of a categorical level (levels beyond the first; the first
// declared level is the reference and encodes as all zeros).
struct EncodedColumn {
    long source = -1;             // index into schema columns
    std::string source_name;
    int level_index = -1;         // -1 for numeric, otherwise 1..L-1
    std::string level_name;       // empty for numeric
    std::string reference_level;  // empty for numeric
    std::string encoded_name;
};

struct EncodedTable {
    Matrix x;
    std::vector<EncodedColumn> colmap;
    std::optional<Vector> y;                 // response column, if any
    std::optional<std::vector<int>> class_ids;  // class column, if any
    std::vector<std::string> class_levels;
};

inline EncodedTable encode(const Table& t, const DatasetSchema& schema) {
    schema.validate();
    if (static_cast<long>(schema.columns.size()) != t.n_cols())
        throw SchemaMismatch("schema has " + std::to_string(schema.columns.size()) +
                             " columns, table has " + std::to_string(t.n_cols()));
    for (long j = 0; j < t.n_cols(); ++j)
        if (schema.columns[static_cast<std::size_t>(j)].name !=
            t.columns[static_cast<std::size_t>(j)])
            throw SchemaMismatch("column " + std::to_string(j + 1) + " is '" +
                                 t.columns[static_cast<std::size_t>(j)] + "', schema expects '" +
                                 schema.columns[static_cast<std::size_t>(j)].name + "'");
    if (t.n_rows() < 1) throw SchemaMismatch("table has no rows");

    EncodedTable out;
    out.x.resize(t.n_rows(), schema.predictor_columns());
    Index col = 0;
    for (std::size_t j = 0; j < schema.columns.size(); ++j) {
        const auto& spec = schema.columns[j];
        if (spec.role == ColumnRole::response) {
            Vector y(t.n_rows());
            for (long i = 0; i < t.n_rows(); ++i) {
                auto v = parse_double(t.rows[static_cast<std::size_t>(i)][j]);
                if (!v) throw NonNumericCell(spec.name, i);
                y(i) = *v;
            }
            out.y = std::move(y);
            continue;
        }
        if (spec.role == ColumnRole::class_label) {
            std::vector<int> ids(static_cast<std::size_t>(t.n_rows()));
            for (long i = 0; i < t.n_rows(); ++i) {
                const auto& v = t.rows[static_cast<std::size_t>(i)][j];
                int id = -1;
                for (std::size_t l = 0; l < spec.levels.size(); ++l)
                    if (spec.levels[l] == v) id = static_cast<int>(l);
                if (id < 0) throw UnknownLevel(spec.name, v);
                ids[static_cast<std::size_t>(i)] = id;
            }
            out.class_ids = std::move(ids);
            out.class_levels = spec.levels;
            continue;
        }
        if (spec.kind == ColumnKind::numeric) {
            for (long i = 0; i < t.n_rows(); ++i) {
                auto v = parse_double(t.rows[static_cast<std::size_t>(i)][j]);
                if (!v) throw NonNumericCell(spec.name, i);
                out.x(i, col) = *v;
            }
            out.colmap.push_back({static_cast<long>(j), spec.name, -1, "", "", spec.name});
            ++col;
            continue;
        }
        // categorical predictor: levels l2..lL become indicator columns
        const Index base = col;
        for (std::size_t l = 1; l < spec.levels.size(); ++l) {
            out.colmap.push_back({static_cast<long>(j), spec.name, static_cast<int>(l),
                                  spec.levels[l], spec.levels[0],
                                  spec.name + "=" + spec.levels[l]});
            ++col;
        }
        for (long i = 0; i < t.n_rows(); ++i) {
            const auto& v = t.rows[static_cast<std::size_t>(i)][j];
            int id = -1;
            for (std::size_t l = 0; l < spec.levels.size(); ++l)
                if (spec.levels[l] == v) id = static_cast<int>(l);
            if (id < 0) throw UnknownLevel(spec.name, v);
            for (std::size_t l = 1; l < spec.levels.size(); ++l)
                out.x(i, base + static_cast<Index>(l) - 1) = (id == static_cast<int>(l)) ? 1.0 : 0.0;
        }
    }
    return out;
}

enum class DecodeMode { continuous, rounded };

// continuous: emit encoded columns as they are (dummy values stay numeric).
// rounded: each dummy group collapses to the level of its largest
// indicator, or the reference level when every indicator is below 0.5.
inline Table decode(const Matrix& x, const std::vector<EncodedColumn>& colmap, DecodeMode mode) {
    if (x.cols() != static_cast<Index>(colmap.size()))
        throw ShapeMismatch("matrix has " + std::to_string(x.cols()) +
                            " columns, colmap covers " + std::to_string(colmap.size()));
    Table t;
    if (mode == DecodeMode::continuous) {
        for (const auto& c : colmap) t.columns.push_back(c.encoded_name);
        t.rows.resize(static_cast<std::size_t>(x.rows()));
        for (Index i = 0; i < x.rows(); ++i) {
            auto& row = t.rows[static_cast<std::size_t>(i)];
            row.resize(static_cast<std::size_t>(x.cols()));
            for (Index j = 0; j < x.cols(); ++j) {
                char buf[32];
                auto res = std::to_chars(buf, buf + sizeof(buf), x(i, j));
                row[static_cast<std::size_t>(j)] = std::string(buf, res.ptr);
            }
        }
        return t;
    }
    // group columns by source
    std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end) in colmap
    for (std::size_t j = 0; j < colmap.size();) {
        std::size_t e = j + 1;
        if (colmap[j].level_index >= 0)
            while (e < colmap.size() && colmap[e].source == colmap[j].source) ++e;
        groups.emplace_back(j, e);
        j = e;
    }
    for (const auto& [b, e] : groups)
        t.columns.push_back(colmap[b].source_name);
    t.rows.resize(static_cast<std::size_t>(x.rows()));
    for (Index i = 0; i < x.rows(); ++i) {
        auto& row = t.rows[static_cast<std::size_t>(i)];
        for (const auto& [b, e] : groups) {
            if (colmap[b].level_index < 0) {
                char buf[32];
                auto res = std::to_chars(buf, buf + sizeof(buf), x(i, static_cast<Index>(b)));
                row.emplace_back(buf, res.ptr);
                continue;
            }
            std::size_t best = b;
            for (std::size_t j = b + 1; j < e; ++j)
                if (x(i, static_cast<Index>(j)) > x(i, static_cast<Index>(best))) best = j;
            row.push_back(x(i, static_cast<Index>(best)) < 0.5 ? colmap[b].reference_level
                                                               : colmap[best].level_name);
        }
    }
    return t;
}

}  // namespace pcv
