#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "surveyml/codebook.hpp"
#include "surveyml/errors.hpp"
#include "surveyml/table.hpp"

namespace surveyml {

struct LoadReport {
    std::size_t rows_read = 0;
    std::map<std::string, std::size_t> coerced_cells;   // out-of-domain, treated missing
    std::map<std::string, std::size_t> missing_cells;   // sentinel or blank
    std::map<std::string, double> missing_rate;

    nlohmann::ordered_json to_json() const {
        return {{"rows_read", rows_read},
                {"coerced_cells", coerced_cells},
                {"missing_cells", missing_cells},
                {"missing_rate", missing_rate}};
    }
};

namespace detail {

inline std::vector<std::string> split_delimited(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
        } else if (ch == delim && !quoted) {
            out.push_back(field);
            field.clear();
        } else {
            field.push_back(ch);
        }
    }
    out.push_back(field);
    for (auto& f : out) {
        while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
        std::size_t start = f.find_first_not_of(' ');
        if (start != std::string::npos && start > 0) f = f.substr(start);
        if (start == std::string::npos) f.clear();
    }
    return out;
}

}  // namespace detail

// Loads one delimiter-separated file under the codebook. Cells holding a
// declared missing code or left blank are masked; out-of-domain codes are
// masked too but counted as coercions rather than failing the load.
inline SurveyTable load_table(const std::string& path, const Codebook& codebook,
                              const std::string& year, LoadReport* report = nullptr,
                              char delim = ',') {
    std::ifstream in(path);
    if (!in) throw DataError("load_table: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("load_table: '" + path + "' is empty");
    std::vector<std::string> header = detail::split_delimited(line, delim);
    std::map<std::string, int> header_index;
    for (std::size_t i = 0; i < header.size(); ++i)
        header_index[header[i]] = static_cast<int>(i);

    std::vector<int> source_index(codebook.columns.size());
    for (std::size_t c = 0; c < codebook.columns.size(); ++c) {
        std::string source = codebook.source_for(codebook.columns[c].name, year);
        auto it = header_index.find(source);
        if (it == header_index.end())
            throw ConfigError("load_table: column '" + codebook.columns[c].name +
                              "' (source '" + source + "') not found in '" + path +
                              "' for year " + year);
        source_index[c] = it->second;
    }

    SurveyTable t;
    for (const auto& c : codebook.columns) t.columns.push_back(c.name);
    std::size_t p = t.columns.size();
    t.sources.push_back(path + " (" + year + ")");
    LoadReport local;
    for (const auto& c : codebook.columns) {
        local.coerced_cells[c.name] = 0;
        local.missing_cells[c.name] = 0;
    }

    while (std::getline(in, line)) {
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        std::vector<std::string> fields = detail::split_delimited(line, delim);
        ++local.rows_read;
        t.row_source.push_back(0);
        for (std::size_t c = 0; c < p; ++c) {
            const CodebookColumn& col = codebook.columns[c];
            double value = 0.0;
            bool missing = false;
            const std::string* cell =
                source_index[c] < static_cast<int>(fields.size())
                    ? &fields[static_cast<std::size_t>(source_index[c])]
                    : nullptr;
            if (!cell || cell->empty()) {
                missing = true;
                ++local.missing_cells[col.name];
            } else {
                char* end = nullptr;
                value = std::strtod(cell->c_str(), &end);
                if (end == cell->c_str() || *end != '\0') {
                    missing = true;  // non-numeric cell
                    ++local.coerced_cells[col.name];
                } else if (value == static_cast<double>(static_cast<long long>(value)) &&
                           col.missing_codes.count(static_cast<int>(value)) > 0) {
                    missing = true;
                    ++local.missing_cells[col.name];
                } else if (!col.code_valid(value)) {
                    missing = true;
                    ++local.coerced_cells[col.name];
                } else if (!col.recode.empty()) {
                    auto rit = col.recode.find(static_cast<int>(value));
                    if (rit != col.recode.end()) value = static_cast<double>(rit->second);
                }
            }
            t.values.data.push_back(missing ? 0.0 : value);
            t.mask.push_back(missing ? 1 : 0);
        }
    }
    t.values.cols = p;
    t.values.rows = local.rows_read;
    for (const auto& c : codebook.columns)
        local.missing_rate[c.name] =
            local.rows_read == 0
                ? 0.0
                : static_cast<double>(local.missing_cells[c.name] +
                                      local.coerced_cells[c.name]) /
                      static_cast<double>(local.rows_read);
    if (report) *report = local;
    return t;
}

// Writes a table back out as a delimited file (blank cells for missing).
inline void write_table_csv(const SurveyTable& t, const std::string& path,
                            char delim = ',') {
    std::ofstream out(path);
    if (!out) throw DataError("write_table_csv: cannot open '" + path + "' for writing");
    for (std::size_t c = 0; c < t.columns.size(); ++c)
        out << (c ? std::string(1, delim) : "") << t.columns[c];
    out << "\n";
    std::ostringstream cell;
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        for (std::size_t c = 0; c < t.n_cols(); ++c) {
            if (c) out << delim;
            if (!t.is_missing(r, c)) {
                cell.str("");
                double v = t.values(r, c);
                if (v == static_cast<double>(static_cast<long long>(v)))
                    cell << static_cast<long long>(v);
                else
                    cell << v;
                out << cell.str();
            }
        }
        out << "\n";
    }
}

}  // namespace surveyml
