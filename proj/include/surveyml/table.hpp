#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "surveyml/errors.hpp"
#include "surveyml/matrix.hpp"

namespace surveyml {

// Rectangular cohort matrix with a per-cell missingness mask. Immutable after
// load by convention: every operation below returns a new table.
struct SurveyTable {
    std::vector<std::string> columns;  // logical names, ordered
    Matrix values;                     // n_rows x n_cols
    std::vector<std::uint8_t> mask;    // 1 = missing, same shape as values
    std::vector<std::string> sources;       // "file (year)" tags
    std::vector<std::uint32_t> row_source;  // per-row index into sources

    std::size_t n_rows() const { return values.rows; }
    std::size_t n_cols() const { return values.cols; }

    bool is_missing(std::size_t r, std::size_t c) const { return mask[r * n_cols() + c] != 0; }
    void set_missing(std::size_t r, std::size_t c, bool m) {
        mask[r * n_cols() + c] = m ? 1 : 0;
    }

    bool any_missing() const {
        for (std::uint8_t m : mask)
            if (m) return true;
        return false;
    }

    int col_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<int>(i);
        return -1;
    }

    int require_col(const std::string& name) const {
        int i = col_index(name);
        if (i < 0) throw ConfigError("table: unknown column '" + name + "'");
        return i;
    }

    static SurveyTable empty(std::vector<std::string> cols) {
        SurveyTable t;
        t.columns = std::move(cols);
        t.values = Matrix(0, t.columns.size());
        return t;
    }
};

// Row selection, preserving order of idx.
inline SurveyTable take_rows(const SurveyTable& t, const std::vector<std::size_t>& idx) {
    SurveyTable out;
    out.columns = t.columns;
    out.sources = t.sources;
    out.values = t.values.select_rows(idx);
    out.mask.resize(idx.size() * t.n_cols());
    out.row_source.resize(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        out.row_source[r] = t.row_source.empty() ? 0 : t.row_source[idx[r]];
        for (std::size_t c = 0; c < t.n_cols(); ++c)
            out.mask[r * t.n_cols() + c] = t.mask[idx[r] * t.n_cols() + c];
    }
    if (t.row_source.empty()) out.row_source.clear();
    return out;
}

// Column projection by logical names.
inline SurveyTable take_cols(const SurveyTable& t, const std::vector<std::string>& names) {
    std::vector<int> idx;
    idx.reserve(names.size());
    for (const auto& n : names) idx.push_back(t.require_col(n));
    SurveyTable out;
    out.columns = names;
    out.sources = t.sources;
    out.row_source = t.row_source;
    out.values = t.values.select_cols(idx);
    out.mask.resize(t.n_rows() * names.size());
    for (std::size_t r = 0; r < t.n_rows(); ++r)
        for (std::size_t j = 0; j < idx.size(); ++j)
            out.mask[r * names.size() + j] =
                t.mask[r * t.n_cols() + static_cast<std::size_t>(idx[j])];
    return out;
}

// Vertical concatenation; all tables must share the same logical columns.
inline SurveyTable concat_tables(const std::vector<SurveyTable>& tables) {
    if (tables.empty()) throw DataError("concat_tables: nothing to concatenate");
    SurveyTable out;
    out.columns = tables[0].columns;
    std::size_t p = out.columns.size();
    for (const auto& t : tables) {
        if (t.columns != out.columns)
            throw ConfigError("concat_tables: logical column mismatch");
        std::uint32_t base = static_cast<std::uint32_t>(out.sources.size());
        for (const auto& s : t.sources) out.sources.push_back(s);
        for (std::size_t r = 0; r < t.n_rows(); ++r)
            out.row_source.push_back(base + (t.row_source.empty() ? 0 : t.row_source[r]));
        out.values.data.insert(out.values.data.end(), t.values.data.begin(),
                               t.values.data.end());
        out.mask.insert(out.mask.end(), t.mask.begin(), t.mask.end());
    }
    out.values.cols = p;
    out.values.rows = out.values.data.size() / (p == 0 ? 1 : p);
    return out;
}

}  // namespace surveyml
